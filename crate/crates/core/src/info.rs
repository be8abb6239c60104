//! Entropy and divergence in bits.

use crate::scalar::Real;

pub fn entropy<T: Real>(p: &[T]) -> T {
    p.iter()
        .filter(|&&v| v > T::zero())
        .fold(T::zero(), |acc, &v| acc - v * v.log2())
}

/// `D(p || q)`, `+inf` when `supp(p)` is not inside `supp(q)`.
pub fn kl_divergence<T: Real>(p: &[T], q: &[T]) -> T {
    let mut d = T::zero();
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > T::zero() {
            if qi <= T::zero() {
                return T::infinity();
            }
            d = d + pi * (pi / qi).log2();
        }
    }
    d.max(T::zero())
}

pub fn binary_entropy<T: Real>(e: T) -> T {
    entropy(&[e, T::one() - e])
}

/// Mutual information of the input prior `w` through channel `rows`.
pub fn mutual_information<T: Real>(w: &[T], rows: &[Vec<T>]) -> T {
    let out = mixture(w, rows);
    w.iter()
        .zip(rows)
        .filter(|(&wi, _)| wi > T::zero())
        .fold(T::zero(), |acc, (&wi, r)| acc + wi * kl_divergence(r, &out))
}

pub fn mixture<T: Real>(w: &[T], rows: &[Vec<T>]) -> Vec<T> {
    let dim = rows.first().map_or(0, |r| r.len());
    let mut out = vec![T::zero(); dim];
    for (&wi, r) in w.iter().zip(rows) {
        for (o, &v) in out.iter_mut().zip(r) {
            *o = *o + wi * v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_entropy_values() {
        assert!((binary_entropy(0.5f64) - 1.0).abs() < 1e-15);
        assert!((1.0 - binary_entropy(0.25f64) - 0.188_721_875_540_867).abs() < 1e-12);
        assert_eq!(binary_entropy(0.0f64), 0.0);
        assert!((binary_entropy(0.11f32) - 0.499_915_8).abs() < 1e-5);
    }

    #[test]
    fn divergence_support() {
        assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]), f64::INFINITY);
        assert_eq!(kl_divergence(&[1.0, 0.0], &[0.5, 0.5]), 1.0);
    }

    #[test]
    fn bsc_mutual_information() {
        let rows = vec![vec![0.8, 0.2], vec![0.2, 0.8]];
        let i = mutual_information(&[0.5, 0.5], &rows);
        assert!((i - (1.0 - binary_entropy(0.2f64))).abs() < 1e-12);
    }
}
