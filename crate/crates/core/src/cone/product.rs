use super::{Cell, DcCone};
use crate::error::{input, Error, Result};

/// Limit on cells produced by explicit products.
pub(crate) const PRODUCT_CAP: usize = 1_000_000;

fn require_single(c: &DcCone, what: &str) -> Result<()> {
    if c.all_single_normal() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "{what} has a cell without exactly one normal; use lazy membership instead"
        )))
    }
}

/// `first ⋉ F` where `kernel[y]` is the cone used after outcome `y`.
///
/// Every cell must carry exactly one normal; the result has one cell per
/// first-factor cell and per choice of a kernel cell for every `y`.
pub fn semidirect_kernel(first: &DcCone, kernel: &[DcCone]) -> Result<DcCone> {
    require_single(first, "first factor")?;
    if kernel.len() != first.dim() {
        return input("kernel must map every symbol of the first factor");
    }
    let z = match kernel.first() {
        Some(k) => k.alphabet().clone(),
        None => return input("kernel is empty"),
    };
    for k in kernel {
        if k.alphabet() != &z {
            return input("kernel cones must share one alphabet");
        }
        require_single(k, "kernel cone")?;
    }
    let alphabet = first.alphabet().product(&z);
    let (dy, dz) = (first.dim(), z.len());
    let mut count: usize = first.cells().len();
    for k in kernel {
        count = count.saturating_mul(k.cells().len());
    }
    if count > PRODUCT_CAP {
        return Err(Error::Resource(format!("explicit product needs {count} cells")));
    }
    if kernel.iter().any(|k| k.is_empty_cone()) {
        // No admissible continuation after some outcome.
        return Ok(DcCone::empty(alphabet));
    }
    let mut cells: Vec<Cell> = Vec::with_capacity(count);
    let mut seen: Vec<Vec<f64>> = Vec::new();
    for c in first.cells() {
        let p = &c.normals()[0];
        let mut choice = vec![0usize; dy];
        'outer: loop {
            let mut r = vec![0.0; dy * dz];
            for y in 0..dy {
                if p[y] == 0.0 {
                    continue;
                }
                let q = &kernel[y].cells()[choice[y]].normals()[0];
                for zz in 0..dz {
                    r[y * dz + zz] = p[y] * q[zz];
                }
            }
            if !seen.iter().any(|s| super::same_normal(s, &r)) {
                seen.push(r.clone());
                cells.push(Cell::from_normalized(vec![r]));
            }
            // Odometer over choices; symbols with p(y) = 0 do not branch.
            let mut y = dy;
            loop {
                if y == 0 {
                    break 'outer;
                }
                y -= 1;
                if p[y] == 0.0 {
                    continue;
                }
                choice[y] += 1;
                if choice[y] < kernel[y].cells().len() {
                    break;
                }
                choice[y] = 0;
            }
        }
    }
    Ok(DcCone::from_parts(alphabet, cells))
}

/// Left-associated semidirect product of cones used one after another.
pub fn semidirect_explicit(cones: &[DcCone]) -> Result<DcCone> {
    let Some(first) = cones.first() else {
        return input("semidirect product needs at least one factor");
    };
    require_single(first, "first factor")?;
    let mut acc = first.clone();
    for next in &cones[1..] {
        let kernel = vec![next.clone(); acc.dim()];
        acc = semidirect_kernel(&acc, &kernel)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{equals_cone, lazy_membership, Alphabet, LazyArgs};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bin() -> Alphabet {
        Alphabet::indexed(2)
    }

    #[test]
    fn halfspace_product_is_product_distribution() {
        let p = DcCone::halfspace(bin(), &[0.3, 0.7]).unwrap();
        let q = DcCone::halfspace(bin(), &[0.6, 0.4]).unwrap();
        let r = semidirect_explicit(&[p, q]).unwrap();
        let expect =
            DcCone::halfspace(bin().power(2), &[0.18, 0.12, 0.42, 0.28]).unwrap();
        assert!(equals_cone(&r, &expect, 1e-9).unwrap());
    }

    #[test]
    fn feedback_square_has_eight_cells() {
        let fb = DcCone::from_cells(bin(), vec![vec![vec![0.75, 0.25]], vec![vec![0.25, 0.75]]]).unwrap();
        let sq = semidirect_explicit(&[fb.clone(), fb.clone()]).unwrap();
        assert_eq!(sq.cells().len(), 8);
        assert_eq!(sq.dim(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let kernel = vec![fb.clone(), fb.clone()];
        for _ in 0..1000 {
            let s: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lazy = lazy_membership(&LazyArgs::Semidirect { first: &fb, kernel: &kernel }, &s, 1e-9).unwrap();
            assert_eq!(sq.contains_portfolio(&s, 1e-9).unwrap(), lazy, "{s:?}");
        }
    }

    #[test]
    fn three_halfspaces_chain() {
        let p = DcCone::halfspace(bin(), &[0.5, 0.5]).unwrap();
        let r = semidirect_explicit(&[p.clone(), p.clone(), p]).unwrap();
        assert_eq!(r.cells().len(), 1);
        assert!(r.cells()[0].normals()[0].iter().all(|v| (v - 0.125).abs() < 1e-15));
    }

    #[test]
    fn multi_normal_cells_are_rejected() {
        let np = DcCone::nonpositive(bin());
        assert!(matches!(semidirect_explicit(&[np.clone(), np]), Err(Error::Unsupported(_))));
    }
}
