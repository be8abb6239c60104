//! Membership tests for cone operations that have no explicit cell form here.

use super::algebra::AtomTable;
use super::order::escape_search;
use super::{dot, sup_norm, Cell, DcCone};
use crate::error::{input, Result};
use crate::kernel::{solve_lp, Bound, LinearProgram, LpStatus, Relation};

pub enum LazyArgs<'a> {
    /// `first ⊗ second` over the product alphabet (same second portfolio for every `y`).
    Product { first: &'a DcCone, second: &'a DcCone },
    /// `first ⋉ F` with `kernel[y]` the cone after outcome `y`.
    Semidirect { first: &'a DcCone, kernel: &'a [DcCone] },
    MinkowskiSum { first: &'a DcCone, second: &'a DcCone },
    /// `antecedent → consequent`, the smallest nonempty cone whose union with
    /// the antecedent covers the consequent.
    Implication { antecedent: &'a DcCone, consequent: &'a DcCone },
}

pub fn lazy_membership(args: &LazyArgs<'_>, s: &[f64], tol: f64) -> Result<bool> {
    if s.iter().any(|v| !v.is_finite()) {
        return input("portfolio has non-finite payoff");
    }
    let slack = tol * sup_norm(s).max(1.0);
    match *args {
        LazyArgs::Product { first, second } => {
            if s.len() != first.dim() * second.dim() {
                return input("portfolio must live on the product alphabet");
            }
            for c in first.cells() {
                for d in second.cells() {
                    if sum_feasible(c, d, s, first.dim(), second.dim(), true, slack, tol)? {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
        LazyArgs::Semidirect { first, kernel } => semidirect_member(first, kernel, s, slack),
        LazyArgs::MinkowskiSum { first, second } => {
            if first.alphabet() != second.alphabet() || s.len() != first.dim() {
                return input("Minkowski sum needs one shared alphabet");
            }
            for c in first.cells() {
                for d in second.cells() {
                    if sum_feasible(c, d, s, first.dim(), second.dim(), false, slack, tol)? {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
        LazyArgs::Implication { antecedent, consequent } => {
            implication_member(antecedent, consequent, s, slack, tol)
        }
    }
}

/// Is there `a ∈ c`, `b ∈ d` with `s <= a ⊕ b`, where `⊕` is the outer sum
/// `a(y) + b(z)` on the product alphabet or the plain sum otherwise?
#[allow(clippy::too_many_arguments)]
fn sum_feasible(
    c: &Cell,
    d: &Cell,
    s: &[f64],
    dy: usize,
    dz: usize,
    outer: bool,
    slack: f64,
    tol: f64,
) -> Result<bool> {
    let nv = dy + dz;
    let mut lp = LinearProgram::minimize(vec![0.0; nv]);
    for j in 0..nv {
        lp.set_bound(j, Bound::free());
    }
    if outer {
        for y in 0..dy {
            for z in 0..dz {
                let mut row = vec![0.0; nv];
                row[y] = 1.0;
                row[dy + z] = 1.0;
                lp.constrain(row, Relation::Ge, s[y * dz + z]);
            }
        }
    } else {
        for (y, &sy) in s.iter().enumerate() {
            let mut row = vec![0.0; nv];
            row[y] = 1.0;
            row[dy + y] = 1.0;
            lp.constrain(row, Relation::Ge, sy);
        }
    }
    for p in c.normals() {
        let mut row = p.clone();
        row.resize(nv, 0.0);
        lp.constrain(row, Relation::Le, slack);
    }
    for q in d.normals() {
        let mut row = vec![0.0; dy];
        row.extend_from_slice(q);
        lp.constrain(row, Relation::Le, slack);
    }
    Ok(solve_lp(&lp, tol)?.status == LpStatus::Optimal)
}

/// After outcome `y` the second portfolio must dominate `s(y, ·) - a(y)`, which is
/// possible exactly when `a(y)` is at least the cheapest price of `s(y, ·)` among
/// the kernel cells; membership then reduces to the price vector lying in `first`.
fn semidirect_member(first: &DcCone, kernel: &[DcCone], s: &[f64], slack: f64) -> Result<bool> {
    let dy = first.dim();
    if kernel.len() != dy {
        return input("kernel must map every symbol of the first factor");
    }
    let dz = match kernel.first() {
        Some(k) => k.dim(),
        None => return input("kernel is empty"),
    };
    if kernel.iter().any(|k| k.dim() != dz) || s.len() != dy * dz {
        return input("portfolio must live on the product alphabet");
    }
    let mut price = vec![0.0; dy];
    for y in 0..dy {
        let row = &s[y * dz..(y + 1) * dz];
        price[y] = kernel[y]
            .cells()
            .iter()
            .map(|d| {
                if d.is_full() {
                    f64::NEG_INFINITY
                } else {
                    d.normals().iter().map(|q| dot(q, row)).fold(f64::NEG_INFINITY, f64::max)
                }
            })
            .fold(f64::INFINITY, f64::min);
        if price[y] == f64::INFINITY {
            return Ok(false);
        }
    }
    Ok(first.cells().iter().any(|c| {
        c.normals().iter().all(|p| {
            let mut acc = 0.0;
            for (&w, &t) in p.iter().zip(&price) {
                if w > 0.0 {
                    if t == f64::NEG_INFINITY {
                        return true;
                    }
                    acc += w * t;
                }
            }
            acc <= slack
        })
    }))
}

fn implication_member(a: &DcCone, b: &DcCone, s: &[f64], slack: f64, tol: f64) -> Result<bool> {
    if a.alphabet() != b.alphabet() || s.len() != a.dim() {
        return input("implication needs one shared alphabet");
    }
    if s.iter().all(|&v| v <= slack) {
        return Ok(true);
    }
    if a.has_full_cell() {
        return Ok(false);
    }
    let d = a.dim();
    let mut table = AtomTable::default();
    let cells: Vec<Vec<usize>> = a.cells().iter().map(|c| table.cell_ids(c)).collect();
    for cell in b.cells() {
        if !cell.contains(s, tol) {
            continue;
        }
        if a.is_empty_cone() {
            return Ok(true);
        }
        let mut probe = |set: &[usize]| -> Result<Option<(f64, Vec<f64>)>> {
            // Variables: b (free, d entries) then delta <= 1.
            let mut obj = vec![0.0; d + 1];
            obj[d] = 1.0;
            let mut lp = LinearProgram::maximize(obj);
            for j in 0..d {
                lp.set_bound(j, Bound::free());
            }
            lp.set_bound(d, Bound { lower: None, upper: Some(1.0) });
            for (y, &sy) in s.iter().enumerate() {
                let mut row = vec![0.0; d + 1];
                row[y] = 1.0;
                lp.constrain(row, Relation::Ge, sy);
            }
            for q in cell.normals() {
                let mut row = q.clone();
                row.push(0.0);
                lp.constrain(row, Relation::Le, 0.0);
            }
            for &i in set {
                let mut row = table.atoms[i].clone();
                row.push(-1.0);
                lp.constrain(row, Relation::Ge, 0.0);
            }
            let r = solve_lp(&lp, tol)?;
            Ok(match r.status {
                LpStatus::Optimal => {
                    let mut w = r.solution;
                    let m = w.pop().unwrap_or(0.0);
                    Some((m, w))
                }
                _ => None,
            })
        };
        let mut boundary = false;
        if escape_search(&cells, &mut probe, slack, &mut boundary)?.is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}
