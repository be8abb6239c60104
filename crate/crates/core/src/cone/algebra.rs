use super::{same_normal, Alphabet, Cell, DcCone};
use crate::error::{input, Error, Result};

/// Hard limit on cells produced by dualization.
pub(crate) const CELL_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineKind {
    Union,
    Intersection,
    DisjointSum,
}

/// Deduplicated table of normals, so cells can be handled as index sets.
#[derive(Debug, Default)]
pub(crate) struct AtomTable {
    pub atoms: Vec<Vec<f64>>,
}

impl AtomTable {
    pub fn id(&mut self, n: &[f64]) -> usize {
        if let Some(i) = self.atoms.iter().position(|a| same_normal(a, n)) {
            return i;
        }
        self.atoms.push(n.to_vec());
        self.atoms.len() - 1
    }

    pub fn cell_ids(&mut self, cell: &Cell) -> Vec<usize> {
        let mut ids: Vec<usize> = cell.normals().iter().map(|n| self.id(n)).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn cell(&self, ids: &[usize]) -> Cell {
        Cell::from_normalized(ids.iter().map(|&i| self.atoms[i].clone()).collect())
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
    }
    true
}

/// Keep only inclusion-minimal sets (each sorted), in a deterministic order.
pub(crate) fn minimal_sets(mut sets: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut kept: Vec<Vec<usize>> = Vec::new();
    for s in sets {
        if !kept.iter().any(|k| is_subset(k, &s)) {
            kept.push(s);
        }
    }
    kept
}

/// Minimal hitting sets of `edges` (Berge's incremental algorithm).
pub(crate) fn minimal_transversals(edges: &[Vec<usize>]) -> Result<Vec<Vec<usize>>> {
    let mut trans: Vec<Vec<usize>> = vec![Vec::new()];
    for e in edges {
        let mut next = Vec::new();
        for t in &trans {
            if t.iter().any(|v| e.binary_search(v).is_ok()) {
                next.push(t.clone());
            } else {
                for &v in e {
                    let mut u = t.clone();
                    let pos = u.binary_search(&v).unwrap_err();
                    u.insert(pos, v);
                    next.push(u);
                }
            }
            if next.len() > CELL_CAP {
                return Err(Error::Resource(format!("dual exceeds {CELL_CAP} cells")));
            }
        }
        trans = minimal_sets(next);
    }
    Ok(trans)
}

impl DcCone {
    fn require_same_alphabet(&self, other: &DcCone) -> Result<()> {
        if self.alphabet() != other.alphabet() {
            return input("cones have different alphabets");
        }
        Ok(())
    }

    pub fn combine(&self, kind: CombineKind, other: &DcCone) -> Result<DcCone> {
        match kind {
            CombineKind::Union => self.union(other),
            CombineKind::Intersection => self.intersection(other),
            CombineKind::DisjointSum => Ok(self.disjoint_sum(other)),
        }
    }

    pub fn union(&self, other: &DcCone) -> Result<DcCone> {
        self.require_same_alphabet(other)?;
        let cells = self.cells().iter().chain(other.cells()).cloned().collect();
        Ok(DcCone::from_parts(self.alphabet().clone(), cells))
    }

    /// Pairwise unions of normal sets, with absorbed cells dropped.
    pub fn intersection(&self, other: &DcCone) -> Result<DcCone> {
        self.require_same_alphabet(other)?;
        let mut table = AtomTable::default();
        let a: Vec<Vec<usize>> = self.cells().iter().map(|c| table.cell_ids(c)).collect();
        let b: Vec<Vec<usize>> = other.cells().iter().map(|c| table.cell_ids(c)).collect();
        let mut sets = Vec::with_capacity(a.len() * b.len());
        for x in &a {
            for y in &b {
                let mut u: Vec<usize> = x.iter().chain(y).copied().collect();
                u.sort_unstable();
                u.dedup();
                sets.push(u);
            }
        }
        let cells = minimal_sets(sets).iter().map(|s| table.cell(s)).collect();
        Ok(DcCone::from_parts(self.alphabet().clone(), cells))
    }

    /// Sum channel over the concatenated alphabet.
    pub fn disjoint_sum(&self, other: &DcCone) -> DcCone {
        let alphabet = self.alphabet().disjoint_union(other.alphabet());
        let (dy, dz) = (self.dim(), other.dim());
        let pad = |cell: &Cell, left: bool| {
            Cell::from_normalized(
                cell.normals()
                    .iter()
                    .map(|n| {
                        let mut v = vec![0.0; dy + dz];
                        if left {
                            v[..dy].copy_from_slice(n);
                        } else {
                            v[dy..].copy_from_slice(n);
                        }
                        v
                    })
                    .collect(),
            )
        };
        let cells = self
            .cells()
            .iter()
            .map(|c| pad(c, true))
            .chain(other.cells().iter().map(|c| pad(c, false)))
            .collect();
        DcCone::from_parts(alphabet, cells)
    }

    /// The dual cone: one cell per minimal choice of one normal from every cell.
    pub fn dual(&self) -> Result<DcCone> {
        let mut table = AtomTable::default();
        let edges: Vec<Vec<usize>> = self.cells().iter().map(|c| table.cell_ids(c)).collect();
        if edges.iter().any(Vec::is_empty) {
            return Ok(DcCone::empty(self.alphabet().clone()));
        }
        let trans = minimal_transversals(&edges)?;
        let cells = trans.iter().map(|t| table.cell(t)).collect();
        Ok(DcCone::from_parts(self.alphabet().clone(), cells))
    }

    /// Image under `f`, given as `map[y] = index of f(y) in target`.
    pub fn pushforward(&self, target: &Alphabet, map: &[usize]) -> Result<DcCone> {
        if map.len() != self.dim() {
            return input("map must be defined on every symbol");
        }
        if let Some(&z) = map.iter().find(|&&z| z >= target.len()) {
            return input(format!("map target index {z} out of range"));
        }
        let cells = self
            .cells()
            .iter()
            .map(|c| {
                Cell::from_normalized(
                    c.normals()
                        .iter()
                        .map(|n| {
                            let mut v = vec![0.0; target.len()];
                            for (y, &w) in n.iter().enumerate() {
                                v[map[y]] += w;
                            }
                            v
                        })
                        .collect(),
                )
            })
            .collect();
        Ok(DcCone::from_parts(target.clone(), cells))
    }

    /// Min-plus mixture with weight `lambda` on `other`.
    pub fn minplus(&self, other: &DcCone, lambda: f64) -> Result<DcCone> {
        self.require_same_alphabet(other)?;
        if !(0.0..=1.0).contains(&lambda) {
            return input(format!("mixing weight {lambda} outside [0, 1]"));
        }
        if self.is_empty_cone() || other.is_empty_cone() {
            return Ok(DcCone::empty(self.alphabet().clone()));
        }
        if lambda == 0.0 {
            return Ok(self.clone());
        }
        if lambda == 1.0 {
            return Ok(other.clone());
        }
        let mut cells = Vec::with_capacity(self.cells().len() * other.cells().len());
        for c in self.cells() {
            for d in other.cells() {
                let mut normals = Vec::with_capacity(c.normals().len() * d.normals().len());
                for p in c.normals() {
                    for q in d.normals() {
                        normals.push(
                            p.iter().zip(q).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect(),
                        );
                    }
                }
                cells.push(Cell::from_normalized(normals));
            }
        }
        Ok(DcCone::from_parts(self.alphabet().clone(), cells))
    }

    /// Mixture with the nonpositive cone: an `eps` chance of an arbitrary outcome.
    pub fn robustify(&self, eps: f64) -> Result<DcCone> {
        self.minplus(&DcCone::nonpositive(self.alphabet().clone()), eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::equals_cone;

    fn bin() -> Alphabet {
        Alphabet::indexed(2)
    }

    fn hs(p: &[f64]) -> DcCone {
        DcCone::halfspace(Alphabet::indexed(p.len()), p).unwrap()
    }

    fn eq(a: &DcCone, b: &DcCone) -> bool {
        equals_cone(a, b, 1e-9).unwrap()
    }

    #[test]
    fn union_and_intersection_of_indicators() {
        let e0 = hs(&[1.0, 0.0]);
        let e1 = hs(&[0.0, 1.0]);
        assert!(eq(&e0.union(&e1).unwrap(), &DcCone::noiseless(bin())));
        assert!(eq(&e0.intersection(&e1).unwrap(), &DcCone::nonpositive(bin())));
        assert!(e0.union(&hs(&[1.0, 1.0, 1.0])).is_err());
    }

    #[test]
    fn disjoint_sum_of_noiseless() {
        let a = DcCone::noiseless(bin());
        let b = DcCone::noiseless(Alphabet::new(["2"]).unwrap());
        let s = a.disjoint_sum(&b);
        assert_eq!(s.alphabet().symbols(), &["0", "1", "2"]);
        assert!(eq(&s, &DcCone::noiseless(Alphabet::indexed(3))));
    }

    #[test]
    fn sum_embedding_ignores_other_block() {
        let a = hs(&[0.3, 0.7]);
        let b = DcCone::nonpositive(Alphabet::new(["z"]).unwrap());
        let s = a.disjoint_sum(&b);
        for (y, inside) in [([-1.0, 0.2], true), ([1.0, 0.2], false)] {
            let big = [y[0], y[1], 1e6];
            assert_eq!(s.contains_portfolio(&big, 1e-9).unwrap(), inside);
            assert_eq!(a.contains_portfolio(&y, 1e-9).unwrap(), inside);
        }
    }

    #[test]
    fn primitive_duals() {
        assert!(eq(&DcCone::empty(bin()).dual().unwrap(), &DcCone::full(bin())));
        assert!(eq(&DcCone::full(bin()).dual().unwrap(), &DcCone::empty(bin())));
        let p = hs(&[0.6, 0.4]);
        assert!(eq(&p.dual().unwrap(), &p));
        assert!(eq(&DcCone::nonpositive(bin()).dual().unwrap(), &DcCone::noiseless(bin())));
    }

    #[test]
    fn transversals_of_two_edges() {
        let t = minimal_transversals(&[vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(t, vec![vec![1], vec![0, 2]]);
    }

    #[test]
    fn pushforward_examples() {
        let p = hs(&[0.25, 0.25, 0.5]);
        let ab = Alphabet::new(["a", "b"]).unwrap();
        let img = p.pushforward(&ab, &[0, 0, 1]).unwrap();
        assert!(eq(&img, &DcCone::halfspace(ab.clone(), &[0.5, 0.5]).unwrap()));
        let id = p.pushforward(p.alphabet(), &[0, 1, 2]).unwrap();
        assert_eq!(id, p);
        let z = Alphabet::new(["z"]).unwrap();
        let c = DcCone::noiseless(bin()).pushforward(&z, &[0, 0]).unwrap();
        assert!(eq(&c, &DcCone::nonpositive(z)));
        assert!(p.pushforward(&ab, &[0, 1]).is_err());
    }

    #[test]
    fn minplus_examples() {
        let m = hs(&[1.0, 0.0]).minplus(&hs(&[0.0, 1.0]), 0.5).unwrap();
        assert!(eq(&m, &hs(&[0.5, 0.5])));
        let a = DcCone::noiseless(bin());
        assert!(eq(&a.minplus(&DcCone::full(bin()), 0.0).unwrap(), &a));
        assert!(a.minplus(&a, 1.5).is_err());
        assert!(a.minplus(&DcCone::empty(bin()), 0.3).unwrap().is_empty_cone());
        let r = a.robustify(0.1).unwrap();
        let expected = DcCone::from_cells(
            bin(),
            vec![
                vec![vec![1.0, 0.0], vec![0.9, 0.1]],
                vec![vec![0.0, 1.0], vec![0.1, 0.9]],
            ],
        )
        .unwrap();
        assert!(eq(&r, &expected));
    }
}
