//! Dense two-phase simplex with Bland's rule.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

/// Per-variable box. `None` on a side means unbounded on that side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound<T> {
    pub lower: Option<T>,
    pub upper: Option<T>,
}

impl<T: Real> Bound<T> {
    pub fn nonneg() -> Self {
        Bound { lower: Some(T::zero()), upper: None }
    }

    pub fn free() -> Self {
        Bound { lower: None, upper: None }
    }

    pub fn boxed(lower: T, upper: T) -> Self {
        Bound { lower: Some(lower), upper: Some(upper) }
    }
}

/// Variables default to `x >= 0`; override with [`LinearProgram::set_bound`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub variable_count: usize,
    pub sense: Sense,
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub bounds: Vec<Bound<T>>,
}

impl<T: Real> LinearProgram<T> {
    pub fn new(sense: Sense, objective: Vec<T>) -> Self {
        let n = objective.len();
        LinearProgram {
            variable_count: n,
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![Bound::nonneg(); n],
        }
    }

    pub fn maximize(objective: Vec<T>) -> Self {
        Self::new(Sense::Maximize, objective)
    }

    pub fn minimize(objective: Vec<T>) -> Self {
        Self::new(Sense::Minimize, objective)
    }

    pub fn constrain(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) -> &mut Self {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    pub fn set_bound(&mut self, var: usize, bound: Bound<T>) -> &mut Self {
        self.bounds[var] = bound;
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.variable_count;
        if self.objective.len() != n || self.bounds.len() != n {
            return Err(Error::Input(format!(
                "objective/bounds length must equal variable_count {n}"
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::Input(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::Input(format!("constraint {i} has non-finite data")));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("objective has non-finite data".into()));
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if b.lower.is_some_and(|v| !v.is_finite()) || b.upper.is_some_and(|v| !v.is_finite()) {
                return Err(Error::Input(format!("bound of variable {j} is not finite")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult<T> {
    pub status: LpStatus,
    /// Objective value in the program's own sense; meaningful only when optimal.
    pub value: T,
    pub solution: Vec<T>,
    /// Sensitivity of the optimal value to each constraint's right-hand side.
    pub duals: Option<Vec<T>>,
}

impl<T: Real> LpResult<T> {
    fn status_only(status: LpStatus, n: usize) -> Self {
        LpResult { status, value: T::nan(), solution: vec![T::zero(); n], duals: None }
    }
}

/// How an original variable is expressed through nonnegative columns.
struct VarMap<T> {
    offset: T,
    cols: Vec<(usize, T)>,
}

pub fn solve_lp<T: Real>(lp: &LinearProgram<T>, tol: T) -> Result<LpResult<T>> {
    lp.validate()?;
    if !(tol > T::zero()) {
        return Err(Error::Input("tolerance must be positive".into()));
    }
    let n = lp.variable_count;

    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut upper_rows: Vec<(usize, T)> = Vec::new();
    for b in &lp.bounds {
        match (b.lower, b.upper) {
            (Some(l), u) => {
                if let Some(u) = u {
                    if u < l {
                        return Ok(LpResult::status_only(LpStatus::Infeasible, n));
                    }
                    upper_rows.push((ncols, u - l));
                }
                maps.push(VarMap { offset: l, cols: vec![(ncols, T::one())] });
                ncols += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap { offset: u, cols: vec![(ncols, -T::one())] });
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap {
                    offset: T::zero(),
                    cols: vec![(ncols, T::one()), (ncols + 1, -T::one())],
                });
                ncols += 2;
            }
        }
    }

    let mut rows = Vec::new();
    let mut rels = Vec::new();
    let mut rhs = Vec::new();
    for c in &lp.constraints {
        let mut row = vec![T::zero(); ncols];
        let mut b = c.rhs;
        for (j, &a) in c.coeffs.iter().enumerate() {
            if a == T::zero() {
                continue;
            }
            b = b - a * maps[j].offset;
            for &(col, k) in &maps[j].cols {
                row[col] = row[col] + a * k;
            }
        }
        rows.push(row);
        rels.push(c.relation);
        rhs.push(b);
    }
    for &(col, cap) in &upper_rows {
        let mut row = vec![T::zero(); ncols];
        row[col] = T::one();
        rows.push(row);
        rels.push(Relation::Le);
        rhs.push(cap);
    }

    let sign = match lp.sense {
        Sense::Minimize => T::one(),
        Sense::Maximize => -T::one(),
    };
    let mut cost = vec![T::zero(); ncols];
    for (j, &o) in lp.objective.iter().enumerate() {
        for &(col, k) in &maps[j].cols {
            cost[col] = cost[col] + sign * o * k;
        }
    }

    let out = solve_standard(rows, rels, rhs, cost, tol)?;
    match out.status {
        LpStatus::Optimal => {}
        s => return Ok(LpResult::status_only(s, n)),
    }

    let solution: Vec<T> = maps
        .iter()
        .map(|m| m.cols.iter().fold(m.offset, |acc, &(col, k)| acc + k * out.x[col]))
        .collect();
    let value = lp
        .objective
        .iter()
        .zip(&solution)
        .fold(T::zero(), |acc, (&c, &x)| acc + c * x);
    let duals = out
        .duals
        .iter()
        .take(lp.constraints.len())
        .map(|&y| sign * y)
        .collect();

    check_residuals(lp, &solution, tol)?;
    Ok(LpResult { status: LpStatus::Optimal, value, solution, duals: Some(duals) })
}

fn check_residuals<T: Real>(lp: &LinearProgram<T>, x: &[T], tol: T) -> Result<()> {
    let thr = tol.max(T::epsilon() * T::lit(1e4));
    for (i, c) in lp.constraints.iter().enumerate() {
        let mut lhs = T::zero();
        let mut scale = T::one().max(c.rhs.abs());
        for (&a, &v) in c.coeffs.iter().zip(x) {
            lhs = lhs + a * v;
            scale = scale.max((a * v).abs());
        }
        let viol = match c.relation {
            Relation::Le => lhs - c.rhs,
            Relation::Ge => c.rhs - lhs,
            Relation::Eq => (lhs - c.rhs).abs(),
        };
        if viol > thr * scale {
            return Err(Error::SolverFailure(format!(
                "constraint {i} residual {viol:?} exceeds tolerance"
            )));
        }
    }
    for (j, (b, &v)) in lp.bounds.iter().zip(x).enumerate() {
        let scale = T::one().max(v.abs());
        let low = b.lower.is_some_and(|l| l - v > thr * scale);
        let high = b.upper.is_some_and(|u| v - u > thr * scale);
        if low || high {
            return Err(Error::SolverFailure(format!("variable {j} violates its bound")));
        }
    }
    Ok(())
}

struct StandardOutcome<T> {
    status: LpStatus,
    x: Vec<T>,
    duals: Vec<T>,
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    obj: Vec<T>,
    basis: Vec<usize>,
    /// Original row index of each tableau row (rows can be dropped as redundant).
    origin: Vec<usize>,
    width: usize,
}

impl<T: Real> Tableau<T> {
    fn rhs(&self, i: usize) -> T {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.rows[r][e];
        for v in self.rows[r].iter_mut() {
            *v = *v / p;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[e];
            if f != T::zero() {
                for (v, &pv) in row.iter_mut().zip(&prow) {
                    *v = *v - f * pv;
                }
                row[e] = T::zero();
            }
        }
        let f = self.obj[e];
        if f != T::zero() {
            for (v, &pv) in self.obj.iter_mut().zip(&prow) {
                *v = *v - f * pv;
            }
            self.obj[e] = T::zero();
        }
        self.basis[r] = e;
    }

    fn price(&mut self, cost: &[T]) {
        let w = self.width;
        let mut obj = vec![T::zero(); w + 1];
        obj[..w].copy_from_slice(&cost[..w]);
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != T::zero() {
                for (o, &v) in obj.iter_mut().zip(row) {
                    *o = *o - cb * v;
                }
            }
        }
        self.obj = obj;
    }

    /// Bland's rule. Returns `Ok(true)` at optimality, `Ok(false)` if unbounded.
    fn run(&mut self, banned: &[bool], eps: T, iterations: &mut usize, cap: usize) -> Result<bool> {
        loop {
            *iterations += 1;
            if *iterations > cap {
                return Err(Error::SolverFailure(format!("simplex iteration cap {cap} exceeded")));
            }
            let entering = (0..self.width).find(|&j| !banned[j] && self.obj[j] < -eps);
            let Some(e) = entering else { return Ok(true) };
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][e];
                if a > eps {
                    let ratio = self.rhs(i) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - eps
                                || ((ratio - br).abs() <= eps && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    }
                }
            }
            let Some((r, _)) = best else { return Ok(false) };
            self.pivot(r, e);
        }
    }
}

/// Minimize `cost · x` subject to `rows x (rel) rhs`, `x >= 0`.
fn solve_standard<T: Real>(
    mut rows: Vec<Vec<T>>,
    mut rels: Vec<Relation>,
    mut rhs: Vec<T>,
    cost: Vec<T>,
    tol: T,
) -> Result<StandardOutcome<T>> {
    let m = rows.len();
    let n = cost.len();
    let eps = T::pivot_eps();

    let mut flipped = vec![false; m];
    for i in 0..m {
        if rhs[i] < T::zero() {
            flipped[i] = true;
            rhs[i] = -rhs[i];
            for v in rows[i].iter_mut() {
                *v = -*v;
            }
            rels[i] = match rels[i] {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // Column layout: structural | one slack/surplus per inequality | artificials.
    let mut width = n;
    let mut aux_col = vec![usize::MAX; m];
    for i in 0..m {
        if rels[i] != Relation::Eq {
            aux_col[i] = width;
            width += 1;
        }
    }
    let mut identity = vec![0usize; m];
    let mut artificial = Vec::new();
    for i in 0..m {
        if rels[i] == Relation::Le {
            identity[i] = aux_col[i];
        } else {
            identity[i] = width;
            artificial.push(width);
            width += 1;
        }
    }
    let mut is_art = vec![false; width];
    for &a in &artificial {
        is_art[a] = true;
    }

    let mut table = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![T::zero(); width + 1];
        row[..n].copy_from_slice(&rows[i]);
        match rels[i] {
            Relation::Le => row[aux_col[i]] = T::one(),
            Relation::Ge => {
                row[aux_col[i]] = -T::one();
                row[identity[i]] = T::one();
            }
            Relation::Eq => row[identity[i]] = T::one(),
        }
        row[width] = rhs[i];
        table.push(row);
    }
    let mut tab = Tableau {
        rows: table,
        obj: Vec::new(),
        basis: identity.clone(),
        origin: (0..m).collect(),
        width,
    };

    let cap = 50_000 + 100 * (m + width);
    let mut iterations = 0usize;
    let none_banned = vec![false; width];

    if !artificial.is_empty() {
        let mut c1 = vec![T::zero(); width];
        for &a in &artificial {
            c1[a] = T::one();
        }
        tab.price(&c1);
        tab.run(&none_banned, eps, &mut iterations, cap)?;
        let infeas = -tab.obj[width];
        let scale = rhs.iter().fold(T::one(), |acc, &b| acc.max(b.abs()));
        if infeas > tol * scale {
            return Ok(StandardOutcome { status: LpStatus::Infeasible, x: vec![], duals: vec![] });
        }
        let mut i = 0;
        while i < tab.rows.len() {
            if is_art[tab.basis[i]] {
                let col = (0..width).find(|&j| !is_art[j] && tab.rows[i][j].abs() > eps);
                match col {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        tab.origin.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let mut c2 = vec![T::zero(); width];
    c2[..n].copy_from_slice(&cost);
    tab.price(&c2);
    if !tab.run(&is_art, eps, &mut iterations, cap)? {
        return Ok(StandardOutcome { status: LpStatus::Unbounded, x: vec![], duals: vec![] });
    }

    let mut x = vec![T::zero(); n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs(i).max(T::zero());
        }
    }
    let kept: Vec<bool> = {
        let mut k = vec![false; m];
        for &o in &tab.origin {
            k[o] = true;
        }
        k
    };
    let duals = (0..m)
        .map(|i| {
            if !kept[i] {
                return T::zero();
            }
            let y = -tab.obj[identity[i]];
            if flipped[i] {
                -y
            } else {
                y
            }
        })
        .collect();
    Ok(StandardOutcome { status: LpStatus::Optimal, x, duals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn one_variable() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.constrain(vec![1.0], Relation::Le, 3.0);
        let r = solve_lp(&lp, 1e-9).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!(approx(r.value, 3.0));
        assert!(approx(r.duals.unwrap()[0], 1.0));
    }

    #[test]
    fn simplex_face() {
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Le, 1.0);
        let r = solve_lp(&lp, 1e-9).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!(approx(r.value, 1.0));
    }

    #[test]
    fn contradictory() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.constrain(vec![1.0], Relation::Le, -1.0);
        assert_eq!(solve_lp(&lp, 1e-9).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded() {
        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.constrain(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp, 1e-9).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn malformed_dimensions() {
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0]);
        lp.constrain(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(solve_lp(&lp, 1e-9), Err(Error::Input(_))));
    }

    #[test]
    fn free_and_boxed_variables() {
        // minimize x + y with x free, y in [-2, 5], x - y >= -1, x + y >= -10
        let mut lp = LinearProgram::minimize(vec![1.0, 1.0]);
        lp.set_bound(0, Bound::free()).set_bound(1, Bound::boxed(-2.0, 5.0));
        lp.constrain(vec![1.0, -1.0], Relation::Ge, -1.0);
        lp.constrain(vec![1.0, 1.0], Relation::Ge, -10.0);
        let r = solve_lp(&lp, 1e-9).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!(approx(r.value, -5.0), "{}", r.value);
        assert!(r.solution[0] - r.solution[1] >= -1.0 - 1e-9);
    }

    #[test]
    fn equality_and_ge_rows_with_strong_duality() {
        // max 3x + 2y s.t. x + y = 4, x - y >= -2, x <= 3, x,y >= 0
        let mut lp = LinearProgram::maximize(vec![3.0, 2.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Eq, 4.0);
        lp.constrain(vec![1.0, -1.0], Relation::Ge, -2.0);
        lp.constrain(vec![1.0, 0.0], Relation::Le, 3.0);
        let r = solve_lp(&lp, 1e-9).unwrap();
        assert!(approx(r.value, 11.0));
        let y = r.duals.unwrap();
        let dual_obj = 4.0 * y[0] - 2.0 * y[1] + 3.0 * y[2];
        assert!(approx(dual_obj, 11.0), "{y:?}");
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under the textbook largest-coefficient rule.
        let mut lp = LinearProgram::minimize(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.constrain(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.constrain(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.constrain(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let r = solve_lp(&lp, 1e-9).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!(approx(r.value, -0.05), "{}", r.value);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::maximize(vec![1.0, 2.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.constrain(vec![2.0, 2.0], Relation::Eq, 2.0);
        let r = solve_lp(&lp, 1e-9).unwrap();
        assert!(approx(r.value, 2.0));
    }

    #[test]
    fn single_precision_instance() {
        let mut lp = LinearProgram::<f32>::maximize(vec![1.0, 1.0]);
        lp.constrain(vec![1.0, 2.0], Relation::Le, 4.0);
        lp.constrain(vec![3.0, 1.0], Relation::Le, 6.0);
        let r = solve_lp(&lp, 1e-5).unwrap();
        assert!((r.value - 2.8).abs() < 1e-5);
    }

    #[test]
    fn deterministic() {
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0, 1.0]);
        lp.constrain(vec![1.0, 1.0, 0.0], Relation::Le, 1.0);
        lp.constrain(vec![0.0, 1.0, 1.0], Relation::Le, 1.0);
        let a = solve_lp(&lp, 1e-9).unwrap();
        let b = solve_lp(&lp, 1e-9).unwrap();
        assert_eq!(a, b);
    }
}
