//! Linear programming and simplex-domain convex minimization.

pub mod margin;
pub mod mirror;
pub mod simplex;

pub use margin::{max_margin_feasibility, Margin};
pub use mirror::{minimize_convex_over_simplices, minimize_with, MirrorOptions, SimplexMinimum};
pub use simplex::{
    solve_lp, Bound, Constraint, LinearProgram, LpResult, LpStatus, Relation, Sense,
};

/// Default absolute tolerance for LP feasibility decisions.
pub const LP_TOL: f64 = 1e-9;
/// Default absolute tolerance for convex solves.
pub const CONVEX_TOL: f64 = 1e-6;
