use super::simplex::{solve_lp, Bound, LinearProgram, LpStatus, Relation};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Margin<T> {
    pub margin: T,
    pub witness: Vec<T>,
}

/// Maximize `delta` subject to `<p, a> <= 0` for each nonstrict `p`,
/// `<q, a> >= delta` for each strict `q`, and `-1 <= a(y) <= 1`.
///
/// The margin is never negative since `a = 0` is feasible.
pub fn max_margin_feasibility<T: Real>(
    nonstrict: &[Vec<T>],
    strict: &[Vec<T>],
    dim: usize,
    tol: T,
) -> Result<Margin<T>> {
    if strict.is_empty() {
        return Err(Error::Input("max-margin problem needs at least one strict normal".into()));
    }
    if nonstrict.iter().chain(strict).any(|v| v.len() != dim) {
        return Err(Error::Input(format!("all normals must have length {dim}")));
    }
    let mut objective = vec![T::zero(); dim + 1];
    objective[dim] = T::one();
    let mut lp = LinearProgram::maximize(objective);
    for y in 0..dim {
        lp.set_bound(y, Bound::boxed(-T::one(), T::one()));
    }
    for p in nonstrict {
        let mut row = p.clone();
        row.push(T::zero());
        lp.constrain(row, Relation::Le, T::zero());
    }
    for q in strict {
        let mut row = q.clone();
        row.push(-T::one());
        lp.constrain(row, Relation::Ge, T::zero());
    }
    let r = solve_lp(&lp, tol)?;
    if r.status != LpStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "max-margin LP reported {:?} although a = 0 is feasible",
            r.status
        )));
    }
    let mut witness = r.solution;
    let margin = witness.pop().unwrap_or_else(T::zero);
    Ok(Margin { margin, witness })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_normals() {
        let m = max_margin_feasibility(&[vec![1.0, 0.0]], &[vec![0.0, 1.0]], 2, 1e-9f64).unwrap();
        assert!((m.margin - 1.0).abs() < 1e-9);
        assert!(m.witness[0] <= 1e-9 && (m.witness[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn same_halfspace_has_no_margin() {
        let m = max_margin_feasibility(&[vec![0.5, 0.5]], &[vec![0.5, 0.5]], 2, 1e-9f64).unwrap();
        assert!(m.margin.abs() < 1e-9);
    }

    #[test]
    fn orthant_blocks_average() {
        let m = max_margin_feasibility(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            &[vec![0.5, 0.5]],
            2,
            1e-9f64,
        )
        .unwrap();
        assert!(m.margin.abs() < 1e-9);
    }

    #[test]
    fn empty_strict_is_an_error() {
        assert!(matches!(
            max_margin_feasibility::<f64>(&[vec![1.0]], &[], 1, 1e-9),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn margin_scales_through_box_only() {
        let base = max_margin_feasibility(&[vec![1.0, 0.0]], &[vec![0.3, 0.7]], 2, 1e-9).unwrap();
        for c in [0.25, 0.5, 2.0, 4.0] {
            let scaled =
                max_margin_feasibility(&[vec![1.0, 0.0]], &[vec![0.3 * c, 0.7 * c]], 2, 1e-9)
                    .unwrap();
            let ratio: f64 = scaled.margin / base.margin;
            assert!(ratio >= f64::min(c, 1.0) - 1e-9 && ratio <= f64::max(c, 1.0) + 1e-9);
        }
    }
}
