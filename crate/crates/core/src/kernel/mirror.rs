//! Exponentiated-gradient minimization over a product of probability simplices.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexMinimum<T> {
    pub value: T,
    pub argmin: Vec<T>,
    /// Frank-Wolfe gap at `argmin`; an upper bound on `value - optimum` for convex `f`.
    pub gap: T,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct MirrorOptions<T> {
    pub tol: T,
    pub max_iterations: usize,
    /// Warm start; must lie in the relative interior. Barycenter when `None`.
    pub start: Option<Vec<T>>,
}

impl<T: Real> MirrorOptions<T> {
    pub fn new(tol: T) -> Self {
        MirrorOptions { tol, max_iterations: 100_000, start: None }
    }
}

fn blocks(dims: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dims.len());
    let mut at = 0;
    for &d in dims {
        out.push((at, at + d));
        at += d;
    }
    out
}

fn fw_gap<T: Real>(x: &[T], g: &[T], blocks: &[(usize, usize)]) -> T {
    blocks.iter().fold(T::zero(), |acc, &(s, e)| {
        let min = g[s..e].iter().fold(T::infinity(), |m, &v| m.min(v));
        let dot = x[s..e].iter().zip(&g[s..e]).fold(T::zero(), |a, (&xi, &gi)| a + xi * gi);
        acc + (dot - min)
    })
}

pub fn minimize_convex_over_simplices<T, F, G>(
    f: F,
    grad: G,
    simplex_dims: &[usize],
    tol: T,
) -> Result<SimplexMinimum<T>>
where
    T: Real,
    F: Fn(&[T]) -> T,
    G: Fn(&[T], &mut [T]),
{
    minimize_with(f, grad, simplex_dims, &MirrorOptions::new(tol))
}

/// Step sizes shrink by backtracking until the relative-smoothness bound
/// `f(x+) <= f(x) + <g, x+ - x> + KL(x+ || x) / eta` holds, then grow again.
pub fn minimize_with<T, F, G>(
    f: F,
    grad: G,
    simplex_dims: &[usize],
    opts: &MirrorOptions<T>,
) -> Result<SimplexMinimum<T>>
where
    T: Real,
    F: Fn(&[T]) -> T,
    G: Fn(&[T], &mut [T]),
{
    if simplex_dims.is_empty() || simplex_dims.contains(&0) {
        return Err(Error::Input("simplex dimensions must be positive".into()));
    }
    let blocks = blocks(simplex_dims);
    let total: usize = simplex_dims.iter().sum();
    let mut x = match &opts.start {
        Some(s) if s.len() == total => s.clone(),
        Some(_) => return Err(Error::Input("warm start has wrong length".into())),
        None => {
            let mut x = vec![T::zero(); total];
            for &(s, e) in &blocks {
                let w = T::one() / T::from_usize(e - s).unwrap();
                x[s..e].iter_mut().for_each(|v| *v = w);
            }
            x
        }
    };
    let tiny = T::min_positive_value().sqrt();
    let mut g = vec![T::zero(); total];
    let mut fx = f(&x);
    grad(&x, &mut g);
    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite value or gradient at interior point".into()));
    }
    let mut eta = T::one();
    let mut next = vec![T::zero(); total];
    let mut iterations = 0;
    let mut gap = fw_gap(&x, &g, &blocks);
    while gap > opts.tol && iterations < opts.max_iterations {
        iterations += 1;
        let mut accepted = false;
        while eta > T::lit(1e-30) {
            for &(s, e) in &blocks {
                let min = g[s..e].iter().fold(T::infinity(), |m, &v| m.min(v));
                let mut z = T::zero();
                for i in s..e {
                    next[i] = (x[i] * (-eta * (g[i] - min)).exp()).max(tiny);
                    z = z + next[i];
                }
                next[s..e].iter_mut().for_each(|v| *v = *v / z);
            }
            let fn_ = f(&next);
            if fn_.is_finite() {
                let mut lin = T::zero();
                let mut kl = T::zero();
                for i in 0..total {
                    lin = lin + g[i] * (next[i] - x[i]);
                    kl = kl + next[i] * (next[i] / x[i]).ln();
                }
                let slack = T::lit(1e-14) * (T::one() + fx.abs());
                if fn_ <= fx + lin + kl / eta + slack {
                    std::mem::swap(&mut x, &mut next);
                    fx = fn_;
                    accepted = true;
                    break;
                }
            }
            eta = eta / T::lit(2.0);
        }
        if !accepted {
            break;
        }
        eta = (eta * T::lit(1.5)).min(T::lit(1e8));
        grad(&x, &mut g);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite gradient at interior point".into()));
        }
        gap = fw_gap(&x, &g, &blocks);
    }
    Ok(SimplexMinimum { value: fx, argmin: x, gap, iterations })
}
