use super::algebra::AtomTable;
use super::{semidirect_kernel, Alphabet, DcCone};
use crate::error::{input, Error, Result};
use crate::kernel::{max_margin_feasibility, solve_lp, LinearProgram, LpStatus, Relation};
use std::collections::HashSet;

/// Budget on LP probes per containment or implication query.
pub(crate) const NODE_CAP: usize = 2_000_000;
/// Budget on enumerated maps for degradedness.
pub(crate) const MAP_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Containment {
    pub contained: bool,
    /// A portfolio in the smaller cone outside the larger one.
    pub witness: Option<Vec<f64>>,
    /// Some probe ended with a margin in `(0, tol]`.
    pub boundary: bool,
}

/// A probe returns the best margin of the region where every atom of the
/// given set is strictly positive, or `None` if that region is empty.
pub(crate) type Probe<'a> = dyn FnMut(&[usize]) -> Result<Option<(f64, Vec<f64>)>> + 'a;

/// Search for a point escaping every cell of `cells` (cells as atom-id sets).
///
/// A point leaves cell `i` once some atom of that cell is strictly positive on
/// it, so cells already hit by the chosen atoms are skipped without branching.
pub(crate) fn escape_search(
    cells: &[Vec<usize>],
    probe: &mut Probe<'_>,
    tol: f64,
    boundary: &mut bool,
) -> Result<Option<Vec<f64>>> {
    let mut explored: HashSet<Vec<usize>> = HashSet::new();
    let mut nodes = 0usize;
    dfs(0, &[], None, cells, probe, tol, boundary, &mut explored, &mut nodes)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    level: usize,
    chosen: &[usize],
    witness: Option<Vec<f64>>,
    cells: &[Vec<usize>],
    probe: &mut Probe<'_>,
    tol: f64,
    boundary: &mut bool,
    explored: &mut HashSet<Vec<usize>>,
    nodes: &mut usize,
) -> Result<Option<Vec<f64>>> {
    let mut lvl = level;
    while lvl < cells.len() && cells[lvl].iter().any(|v| chosen.binary_search(v).is_ok()) {
        lvl += 1;
    }
    if lvl == cells.len() {
        return Ok(witness);
    }
    for &v in &cells[lvl] {
        let mut next = chosen.to_vec();
        let pos = next.binary_search(&v).unwrap_err();
        next.insert(pos, v);
        if !explored.insert(next.clone()) {
            continue;
        }
        *nodes += 1;
        if *nodes > NODE_CAP {
            return Err(Error::Resource(format!("selection search exceeded {NODE_CAP} probes")));
        }
        match probe(&next)? {
            Some((m, w)) if m > tol => {
                if let Some(w) =
                    dfs(lvl + 1, &next, Some(w), cells, probe, tol, boundary, explored, nodes)?
                {
                    return Ok(Some(w));
                }
            }
            Some((m, _)) if m > 0.0 => *boundary = true,
            _ => {}
        }
    }
    Ok(None)
}

/// Decide `b ⊆ a`.
pub fn contains_cone(a: &DcCone, b: &DcCone, tol: f64) -> Result<Containment> {
    if a.alphabet() != b.alphabet() {
        return input("containment needs equal alphabets");
    }
    let yes = |boundary| Containment { contained: true, witness: None, boundary };
    if b.is_empty_cone() || a.has_full_cell() {
        return Ok(yes(false));
    }
    if a.is_empty_cone() {
        return Ok(Containment { contained: false, witness: Some(vec![0.0; a.dim()]), boundary: false });
    }
    let mut table = AtomTable::default();
    let cells: Vec<Vec<usize>> = a.cells().iter().map(|c| table.cell_ids(c)).collect();
    let dim = a.dim();
    let mut boundary = false;
    for c in b.cells() {
        let nonstrict = c.normals();
        let mut probe = |set: &[usize]| -> Result<Option<(f64, Vec<f64>)>> {
            let strict: Vec<Vec<f64>> = set.iter().map(|&i| table.atoms[i].clone()).collect();
            let m = max_margin_feasibility(nonstrict, &strict, dim, tol)?;
            Ok(Some((m.margin, m.witness)))
        };
        if let Some(w) = escape_search(&cells, &mut probe, tol, &mut boundary)? {
            return Ok(Containment { contained: false, witness: Some(w), boundary });
        }
    }
    Ok(yes(boundary))
}

pub fn equals_cone(a: &DcCone, b: &DcCone, tol: f64) -> Result<bool> {
    Ok(contains_cone(a, b, tol)?.contained && contains_cone(b, a, tol)?.contained)
}

impl DcCone {
    /// A distribution `q` with every cell inside `q°`, if one exists.
    pub fn noninformative_witness(&self, tol: f64) -> Result<Option<Vec<f64>>> {
        if self.is_empty_cone() || self.has_full_cell() {
            return Ok(None);
        }
        let d = self.dim();
        let total: usize = self.cells().iter().map(|c| c.normals().len()).sum();
        let mut lp = LinearProgram::minimize(vec![0.0; d + total]);
        let mut row = vec![0.0; d + total];
        row[..d].iter_mut().for_each(|v| *v = 1.0);
        lp.constrain(row, Relation::Eq, 1.0);
        let mut offset = d;
        for c in self.cells() {
            for y in 0..d {
                let mut row = vec![0.0; d + total];
                row[y] = 1.0;
                for (j, p) in c.normals().iter().enumerate() {
                    row[offset + j] = -p[y];
                }
                lp.constrain(row, Relation::Eq, 0.0);
            }
            offset += c.normals().len();
        }
        let r = solve_lp(&lp, tol)?;
        Ok((r.status == LpStatus::Optimal).then(|| r.solution[..d].to_vec()))
    }

    /// `false` exactly when some single distribution prices every cell;
    /// the empty cone counts as non-informative.
    pub fn is_informative(&self, tol: f64) -> Result<bool> {
        if self.is_empty_cone() {
            return Ok(false);
        }
        if self.has_full_cell() {
            return Ok(true);
        }
        Ok(self.noninformative_witness(tol)?.is_none())
    }
}

fn for_each_map(
    from: usize,
    to: usize,
    mut visit: impl FnMut(&[usize]) -> Result<bool>,
) -> Result<Option<Vec<usize>>> {
    let count = super::checked_pow(to, from).filter(|&c| c <= MAP_CAP);
    let Some(count) = count else {
        return Err(Error::Resource(format!("{to}^{from} maps exceed enumeration cap {MAP_CAP}")));
    };
    for idx in 0..count {
        let f = super::sequence_digits(idx, to, from);
        if visit(&f)? {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

/// A map `f` with `b ⊆ f#a`, if any.
pub fn degraded_deterministic(b: &DcCone, a: &DcCone, tol: f64) -> Result<Option<Vec<usize>>> {
    degraded_kernel(std::slice::from_ref(b), std::slice::from_ref(a), tol)
}

/// One map `f` serving every input symbol of two channels.
pub fn degraded_kernel(b: &[DcCone], a: &[DcCone], tol: f64) -> Result<Option<Vec<usize>>> {
    if a.len() != b.len() || a.is_empty() {
        return input("channels must share a nonempty input alphabet");
    }
    let target: &Alphabet = b[0].alphabet();
    let source = a[0].alphabet();
    if b.iter().any(|c| c.alphabet() != target) || a.iter().any(|c| c.alphabet() != source) {
        return input("cones of a channel must share an output alphabet");
    }
    for_each_map(source.len(), target.len(), |f| {
        for (bx, ax) in b.iter().zip(a) {
            let img = ax.pushforward(target, f)?;
            if !contains_cone(&img, bx, tol)?.contained {
                return Ok(false);
            }
        }
        Ok(true)
    })
}

/// `b ⊆ π₂#(a ⋉ F)` for a supplied pointwise non-informative kernel `F`.
pub fn degraded_given_kernel(b: &DcCone, a: &DcCone, kernel: &[DcCone], tol: f64) -> Result<bool> {
    for (y, f) in kernel.iter().enumerate() {
        if f.is_informative(tol)? {
            return Err(Error::Precondition(format!("kernel cone at symbol {y} is informative")));
        }
    }
    let joint = semidirect_kernel(a, kernel)?;
    let z = b.alphabet();
    if kernel.iter().any(|f| f.alphabet() != z) {
        return input("kernel cones must live on the target alphabet");
    }
    let proj: Vec<usize> = (0..joint.dim()).map(|i| i % z.len()).collect();
    let img = joint.pushforward(z, &proj)?;
    Ok(contains_cone(&img, b, tol)?.contained)
}
