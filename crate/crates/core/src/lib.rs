//! Pricing downward-closed cones over finite alphabets, their information
//! capacity and entropy, and exhaustive verification of deterministic channel
//! and source coding games built on them.
//!
//! The LP kernel and the information measures are generic over [`Real`];
//! the cone layer and everything above it works in `f64`.

// Range checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channels;
pub mod cone;
pub mod error;
pub mod games;
pub mod info;
pub mod kernel;
pub mod sampling;
pub mod scalar;
pub mod source;

pub use cone::{Alphabet, Cell, DcCone, Normal, Portfolio};
pub use error::{Error, Result};
pub use scalar::Real;

pub type LinearProgram = kernel::LinearProgram<f64>;
pub type LpResult = kernel::LpResult<f64>;
pub type Margin = kernel::Margin<f64>;
pub type SimplexMinimum = kernel::SimplexMinimum<f64>;
