//! Pricing downward-closed cones in H-form: a union of cells, each cell an
//! intersection of halfspaces `{a : <p, a> <= 0}` with `p` a probability vector.

mod algebra;
mod alphabet;
mod json;
mod lazy;
mod order;
mod product;

pub use algebra::CombineKind;
pub use alphabet::{checked_pow, sequence_digits, sequence_index, Alphabet};
pub use lazy::{lazy_membership, LazyArgs};
pub use order::{
    contains_cone, degraded_deterministic, degraded_given_kernel, degraded_kernel, equals_cone,
    Containment,
};
pub use product::{semidirect_explicit, semidirect_kernel};

use crate::error::{input, Error, Result};

/// Two normals closer than this in every coordinate are the same halfspace.
pub(crate) const NORMAL_EQ_TOL: f64 = 1e-12;

/// Validate and scale a nonnegative weight vector to sum 1.
pub fn normalize(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.iter().any(|w| !w.is_finite()) {
        return input("normal has non-finite weight");
    }
    if weights.iter().any(|&w| w < 0.0) {
        return input(format!("normal has negative weight: {weights:?}"));
    }
    let s: f64 = weights.iter().sum();
    if s <= 0.0 {
        return input("normal is the zero vector");
    }
    Ok(weights.iter().map(|w| w / s).collect())
}

pub(crate) fn same_normal(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= NORMAL_EQ_TOL)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sup_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub(crate) fn indicator(dim: usize, y: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[y] = 1.0;
    e
}

/// A probability vector over an alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Normal {
    pub alphabet: Alphabet,
    pub weights: Vec<f64>,
}

impl Normal {
    pub fn new(alphabet: Alphabet, weights: &[f64]) -> Result<Self> {
        if weights.len() != alphabet.len() {
            return input("normal length differs from alphabet size");
        }
        Ok(Normal { weights: normalize(weights)?, alphabet })
    }
}

/// A payoff vector over an alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio {
    pub alphabet: Alphabet,
    pub payoffs: Vec<f64>,
}

impl Portfolio {
    pub fn new(alphabet: Alphabet, payoffs: Vec<f64>) -> Result<Self> {
        if payoffs.len() != alphabet.len() {
            return input("portfolio length differs from alphabet size");
        }
        if payoffs.iter().any(|v| !v.is_finite()) {
            return input("portfolio has non-finite payoff");
        }
        Ok(Portfolio { alphabet, payoffs })
    }
}

/// Intersection of halfspaces; no normals means the whole space.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    normals: Vec<Vec<f64>>,
}

impl Cell {
    pub(crate) fn from_normalized(mut normals: Vec<Vec<f64>>) -> Self {
        let mut kept: Vec<Vec<f64>> = Vec::with_capacity(normals.len());
        for n in normals.drain(..) {
            if !kept.iter().any(|k| same_normal(k, &n)) {
                kept.push(n);
            }
        }
        Cell { normals: kept }
    }

    pub fn full() -> Self {
        Cell { normals: Vec::new() }
    }

    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }

    pub fn is_full(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn contains(&self, s: &[f64], tol: f64) -> bool {
        let slack = tol * sup_norm(s).max(1.0);
        self.normals.iter().all(|p| dot(p, s) <= slack)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcCone {
    alphabet: Alphabet,
    cells: Vec<Cell>,
}

/// Named constructors mirroring the primitive cone families.
#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    Halfspace(Vec<f64>),
    Full,
    Empty,
    Nonpositive,
    Noiseless,
    FromGenerators(Vec<Vec<f64>>),
    AdversarialCell(Vec<usize>),
}

pub fn primitive_cone(kind: Primitive, alphabet: Alphabet) -> Result<DcCone> {
    match kind {
        Primitive::Halfspace(p) => DcCone::halfspace(alphabet, &p),
        Primitive::Full => Ok(DcCone::full(alphabet)),
        Primitive::Empty => Ok(DcCone::empty(alphabet)),
        Primitive::Nonpositive => Ok(DcCone::nonpositive(alphabet)),
        Primitive::Noiseless => Ok(DcCone::noiseless(alphabet)),
        Primitive::FromGenerators(g) => DcCone::from_generators(alphabet, &g),
        Primitive::AdversarialCell(s) => DcCone::adversarial_cell(alphabet, &s),
    }
}

impl DcCone {
    /// Cells given as raw (unnormalized, nonnegative) normal lists.
    pub fn from_cells(alphabet: Alphabet, cells: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let dim = alphabet.len();
        let mut out = Vec::with_capacity(cells.len());
        for cell in cells {
            let mut normals = Vec::with_capacity(cell.len());
            for n in cell {
                if n.len() != dim {
                    return input(format!("normal length {} differs from alphabet size {dim}", n.len()));
                }
                normals.push(normalize(&n)?);
            }
            out.push(Cell::from_normalized(normals));
        }
        Ok(DcCone { alphabet, cells: out })
    }

    pub(crate) fn from_parts(alphabet: Alphabet, cells: Vec<Cell>) -> Self {
        DcCone { alphabet, cells }
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        DcCone { alphabet, cells: Vec::new() }
    }

    pub fn full(alphabet: Alphabet) -> Self {
        DcCone { alphabet, cells: vec![Cell::full()] }
    }

    pub fn nonpositive(alphabet: Alphabet) -> Self {
        let d = alphabet.len();
        let cell = Cell::from_normalized((0..d).map(|y| indicator(d, y)).collect());
        DcCone { alphabet, cells: vec![cell] }
    }

    /// Everything except the strictly positive orthant.
    pub fn noiseless(alphabet: Alphabet) -> Self {
        let d = alphabet.len();
        let cells = (0..d).map(|y| Cell::from_normalized(vec![indicator(d, y)])).collect();
        DcCone { alphabet, cells }
    }

    pub fn halfspace(alphabet: Alphabet, p: &[f64]) -> Result<Self> {
        Self::from_cells(alphabet, vec![vec![p.to_vec()]])
    }

    /// One cell with the indicator normals of `allowed`; payoffs may be
    /// positive only off `allowed`.
    pub fn adversarial_cell(alphabet: Alphabet, allowed: &[usize]) -> Result<Self> {
        let d = alphabet.len();
        if let Some(&y) = allowed.iter().find(|&&y| y >= d) {
            return input(format!("symbol index {y} out of range"));
        }
        let cell = Cell::from_normalized(allowed.iter().map(|&y| indicator(d, y)).collect());
        Ok(DcCone { alphabet, cells: vec![cell] })
    }

    /// Union over `g` of `{a : exists gamma >= 0, a <= gamma g}`.
    pub fn from_generators(alphabet: Alphabet, generators: &[Vec<f64>]) -> Result<Self> {
        let d = alphabet.len();
        let mut cells = Vec::with_capacity(generators.len());
        for g in generators {
            if g.len() != d {
                return input("generator length differs from alphabet size");
            }
            if g.iter().any(|v| !v.is_finite()) {
                return input("generator has non-finite entry");
            }
            cells.push(generator_cell(g));
        }
        Ok(DcCone { alphabet, cells })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dim(&self) -> usize {
        self.alphabet.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn is_empty_cone(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn has_full_cell(&self) -> bool {
        self.cells.iter().any(Cell::is_full)
    }

    pub fn all_single_normal(&self) -> bool {
        self.cells.iter().all(|c| c.normals.len() == 1)
    }

    /// Membership with relative slack `tol * max(1, |s|_inf)`.
    pub fn contains_portfolio(&self, s: &[f64], tol: f64) -> Result<bool> {
        if s.len() != self.dim() {
            return Err(Error::Input(format!(
                "portfolio length {} differs from alphabet size {}",
                s.len(),
                self.dim()
            )));
        }
        Ok(self.cells.iter().any(|c| c.contains(s, tol)))
    }

    pub fn contains(&self, s: &Portfolio, tol: f64) -> Result<bool> {
        if s.alphabet != self.alphabet {
            return input("portfolio alphabet differs from cone alphabet");
        }
        self.contains_portfolio(&s.payoffs, tol)
    }

    /// Drop duplicate cells and cells whose normal set contains another
    /// cell's normal set (those are subsets of the other cell).
    pub fn absorbed(&self) -> DcCone {
        let mut order: Vec<usize> = (0..self.cells.len()).collect();
        order.sort_by_key(|&i| self.cells[i].normals.len());
        let mut kept: Vec<usize> = Vec::new();
        for i in order {
            let ci = &self.cells[i];
            let dominated = kept.iter().any(|&k| {
                self.cells[k]
                    .normals
                    .iter()
                    .all(|n| ci.normals.iter().any(|m| same_normal(n, m)))
            });
            if !dominated {
                kept.push(i);
            }
        }
        kept.sort_unstable();
        DcCone {
            alphabet: self.alphabet.clone(),
            cells: kept.into_iter().map(|i| self.cells[i].clone()).collect(),
        }
    }

    /// Remove cells contained in another cell, decided by LP.
    pub fn pruned(&self, tol: f64) -> Result<DcCone> {
        let base = self.absorbed();
        let mut keep = vec![true; base.cells.len()];
        for i in 0..base.cells.len() {
            for j in 0..base.cells.len() {
                if i == j || !keep[j] || !keep[i] {
                    continue;
                }
                let single_i = DcCone::from_parts(base.alphabet.clone(), vec![base.cells[i].clone()]);
                let single_j = DcCone::from_parts(base.alphabet.clone(), vec![base.cells[j].clone()]);
                if contains_cone(&single_j, &single_i, tol)?.contained {
                    keep[i] = false;
                }
            }
        }
        let cells = base
            .cells
            .into_iter()
            .zip(keep)
            .filter_map(|(c, k)| k.then_some(c))
            .collect();
        Ok(DcCone { alphabet: base.alphabet, cells })
    }

    /// Cells and normals sorted lexicographically.
    pub fn canonical(&self) -> DcCone {
        let mut cells: Vec<Cell> = self
            .cells
            .iter()
            .map(|c| {
                let mut n = c.normals.clone();
                n.sort_by(|a, b| cmp_vec(a, b));
                Cell { normals: n }
            })
            .collect();
        cells.sort_by(|a, b| {
            for (x, y) in a.normals.iter().zip(&b.normals) {
                match cmp_vec(x, y) {
                    std::cmp::Ordering::Equal => continue,
                    o => return o,
                }
            }
            a.normals.len().cmp(&b.normals.len())
        });
        DcCone { alphabet: self.alphabet.clone(), cells }
    }
}

fn cmp_vec(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Eliminates `gamma` from `a <= gamma g`.
fn generator_cell(g: &[f64]) -> Cell {
    let d = g.len();
    let mut normals = Vec::new();
    for (y, &gy) in g.iter().enumerate() {
        if gy == 0.0 {
            normals.push(indicator(d, y));
        }
    }
    let neg: Vec<usize> = (0..d).filter(|&y| g[y] < 0.0).collect();
    let pos: Vec<usize> = (0..d).filter(|&y| g[y] > 0.0).collect();
    if !neg.is_empty() {
        for &m in &neg {
            normals.push(indicator(d, m));
        }
        for &p in &pos {
            for &m in &neg {
                let mut n = vec![0.0; d];
                n[m] = g[p];
                n[p] = -g[m];
                let s = g[p] - g[m];
                n.iter_mut().for_each(|v| *v /= s);
                normals.push(n);
            }
        }
    } else if pos.len() == d {
        return Cell::full();
    }
    Cell::from_normalized(normals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bin() -> Alphabet {
        Alphabet::indexed(2)
    }

    #[test]
    fn halfspace_normalizes() {
        let c = DcCone::halfspace(bin(), &[2.0, 2.0]).unwrap();
        assert_eq!(c.cells()[0].normals(), &[vec![0.5, 0.5]]);
        assert!(DcCone::halfspace(bin(), &[0.0, 0.0]).is_err());
        assert!(DcCone::halfspace(bin(), &[-1.0, 2.0]).is_err());
    }

    #[test]
    fn generator_conversion_example() {
        let c = DcCone::from_generators(bin(), &[vec![-0.1, 0.9]]).unwrap();
        let n = c.cells()[0].normals();
        assert_eq!(n.len(), 2);
        assert!(same_normal(&n[0], &[1.0, 0.0]));
        assert!((n[1][0] - 0.9).abs() < 1e-15 && (n[1][1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn generator_cell_matches_direct_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let g: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let cone = DcCone::from_generators(Alphabet::indexed(3), std::slice::from_ref(&g)).unwrap();
            for _ in 0..200 {
                let a: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
                // a <= gamma g for some gamma >= 0: intersect the per-coordinate gamma ranges.
                let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
                for y in 0..3 {
                    if g[y] > 0.0 {
                        lo = lo.max(a[y] / g[y]);
                    } else if g[y] < 0.0 {
                        hi = hi.min(a[y] / g[y]);
                    } else if a[y] > 0.0 {
                        hi = -1.0;
                    }
                }
                let direct = lo <= hi;
                let margin_ok = (lo - hi).abs() > 1e-7;
                if margin_ok {
                    assert_eq!(cone.contains_portfolio(&a, 1e-12).unwrap(), direct, "g={g:?} a={a:?}");
                }
            }
        }
    }

    #[test]
    fn positive_generator_is_full_and_zero_is_nonpositive() {
        let c = DcCone::from_generators(bin(), &[vec![1.0, 2.0]]).unwrap();
        assert!(c.has_full_cell());
        let z = DcCone::from_generators(bin(), &[vec![0.0, 0.0]]).unwrap();
        assert_eq!(z.cells()[0].normals().len(), 2);
    }

    #[test]
    fn adversarial_cell_example() {
        let c = DcCone::adversarial_cell(Alphabet::indexed(3), &[0, 1]).unwrap();
        assert!(c.contains_portfolio(&[0.0, -1.0, 5.0], 1e-9).unwrap());
        assert!(!c.contains_portfolio(&[0.1, -1.0, 5.0], 1e-9).unwrap());
        let full = DcCone::adversarial_cell(Alphabet::indexed(3), &[]).unwrap();
        assert!(full.has_full_cell());
    }

    #[test]
    fn membership_examples() {
        let np = DcCone::nonpositive(bin());
        assert!(np.contains_portfolio(&[-1.0, -2.0], 1e-9).unwrap());
        let beta: f64 = 0.25;
        let fb = DcCone::from_cells(
            bin(),
            vec![vec![vec![1.0 - beta, beta]], vec![vec![beta, 1.0 - beta]]],
        )
        .unwrap();
        assert!(fb.contains_portfolio(&[-1.0, 3.0], 1e-9).unwrap());
        assert!(!fb.contains_portfolio(&[2.0, 2.0], 1e-9).unwrap());
        assert!(!DcCone::empty(bin()).contains_portfolio(&[-5.0, -5.0], 1e-9).unwrap());
        assert!(DcCone::full(bin()).contains_portfolio(&[5.0, 5.0], 1e-9).unwrap());
        assert!(np.contains_portfolio(&[1.0], 1e-9).is_err());
    }

    #[test]
    fn portfolio_alphabet_mismatch() {
        let np = DcCone::nonpositive(bin());
        let other = Alphabet::new(["a", "b"]).unwrap();
        let s = Portfolio::new(other, vec![-1.0, -1.0]).unwrap();
        assert!(np.contains(&s, 1e-9).is_err());
    }

    #[test]
    fn absorption_keeps_larger_cells() {
        let c = DcCone::from_cells(
            bin(),
            vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![1.0, 0.0]]],
        )
        .unwrap();
        let a = c.absorbed();
        assert_eq!(a.cells().len(), 1);
        assert_eq!(a.cells()[0].normals().len(), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn cone_strategy() -> impl Strategy<Value = DcCone> {
            prop::collection::vec(
                prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 1..3),
                1..3,
            )
            .prop_filter_map("nonzero normals", |cells| {
                DcCone::from_cells(Alphabet::indexed(3), cells).ok()
            })
        }

        proptest! {
            #[test]
            fn scaling_preserves_membership(
                cone in cone_strategy(),
                s in prop::collection::vec(-1.0f64..1.0, 3),
                gamma in 0.0f64..10.0,
            ) {
                if cone.contains_portfolio(&s, 1e-9).unwrap() {
                    let scaled: Vec<f64> = s.iter().map(|v| v * gamma).collect();
                    prop_assert!(cone.contains_portfolio(&scaled, 1e-9).unwrap());
                }
            }

            #[test]
            fn downward_closure(
                cone in cone_strategy(),
                s in prop::collection::vec(-1.0f64..1.0, 3),
                b in prop::collection::vec(0.0f64..2.0, 3),
            ) {
                if cone.contains_portfolio(&s, 1e-9).unwrap() {
                    let lower: Vec<f64> = s.iter().zip(&b).map(|(x, d)| x - d).collect();
                    prop_assert!(cone.contains_portfolio(&lower, 1e-9).unwrap());
                }
            }
        }
    }
}
