//! Information capacity of a pricing cone: `min_q max_cell min_{p in hull(cell)} D(p || q)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::DcCone;
use crate::error::{input, Error, Result};
use crate::info::{binary_entropy, kl_divergence, mixture};
use crate::kernel::{minimize_with, solve_lp, Bound, LinearProgram, LpStatus, MirrorOptions, Relation};

/// Outer iteration cap for both iterative methods.
pub const MAX_ITERATIONS: usize = 100_000;
/// The prior is kept at least this large while iterating.
const PRIOR_FLOOR: f64 = 1e-12;
/// Grid step of the validation oracle.
pub const GRID_STEP: f64 = 0.002;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityMethod {
    Auto,
    BlahutArimoto,
    Minimax,
    OracleGrid,
}

impl std::str::FromStr for CapacityMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => CapacityMethod::Auto,
            "blahut_arimoto" | "ba" => CapacityMethod::BlahutArimoto,
            "minimax" => CapacityMethod::Minimax,
            "oracle_grid" | "grid" => CapacityMethod::OracleGrid,
            _ => return input(format!("unknown capacity method '{s}'")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    /// Bits; `-inf` for the empty cone, `+inf` when some cell is the whole space.
    pub value: f64,
    /// Certified bracket around the true capacity (equal to `value` at the infinities).
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub prior: Option<Vec<f64>>,
    /// Closest point of each cell's normal hull to the prior, in cell order.
    pub posteriors: Vec<Vec<f64>>,
    pub method: CapacityMethod,
    pub iterations: usize,
    pub log: Vec<String>,
}

impl CapacityResult {
    fn infinite(value: f64, method: CapacityMethod, why: &str) -> Self {
        CapacityResult {
            value,
            lower_bound: value,
            upper_bound: value,
            prior: None,
            posteriors: Vec::new(),
            method,
            iterations: 0,
            log: vec![why.to_string()],
        }
    }
}

/// `log2 L - H_b(eps) - eps log2(L - 1)`.
pub fn requirement_value(messages: usize, eps: f64) -> Result<f64> {
    if messages == 0 {
        return input("message count must be at least 1");
    }
    if !(eps > 0.0 && eps < 1.0) {
        return input("loss must lie in (0, 1)");
    }
    if messages == 1 {
        return Ok(0.0);
    }
    let l = messages as f64;
    Ok(l.log2() - binary_entropy(eps) - eps * (l - 1.0).log2())
}

pub fn info_capacity(cone: &DcCone, method: CapacityMethod, tol: f64) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return input("tolerance must be positive");
    }
    let method = match method {
        CapacityMethod::Auto if cone.all_single_normal() => CapacityMethod::BlahutArimoto,
        CapacityMethod::Auto => CapacityMethod::Minimax,
        m => m,
    };
    if method == CapacityMethod::BlahutArimoto && !cone.all_single_normal() {
        return input("Blahut-Arimoto needs every cell to have exactly one normal");
    }
    if method == CapacityMethod::OracleGrid && cone.dim() > 3 {
        return input("grid oracle is limited to alphabets of at most 3 symbols");
    }
    if cone.is_empty_cone() {
        return Ok(CapacityResult::infinite(f64::NEG_INFINITY, method, "empty cone"));
    }
    if cone.has_full_cell() {
        return Ok(CapacityResult::infinite(f64::INFINITY, method, "cone has a full cell"));
    }
    match method {
        CapacityMethod::BlahutArimoto => blahut_arimoto(cone, tol),
        CapacityMethod::Minimax => minimax(cone, tol),
        CapacityMethod::OracleGrid => oracle_grid(cone),
        CapacityMethod::Auto => unreachable!(),
    }
}

fn uniform(d: usize) -> Vec<f64> {
    vec![1.0 / d as f64; d]
}

fn floored(mut q: Vec<f64>) -> Vec<f64> {
    q.iter_mut().for_each(|v| *v = v.max(PRIOR_FLOOR));
    let z: f64 = q.iter().sum();
    q.iter_mut().for_each(|v| *v /= z);
    q
}

fn normalize_weights(w: &mut [f64]) {
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= z);
}

/// Multiplicative update `w_i <- w_i 2^{step g_i}`, shifted for stability.
fn reweight(w: &mut [f64], g: &[f64], step: f64) {
    let top = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for (wi, &gi) in w.iter_mut().zip(g) {
        *wi *= (step * (gi - top)).exp2();
    }
    normalize_weights(w);
}

fn blahut_arimoto(cone: &DcCone, tol: f64) -> Result<CapacityResult> {
    let rows: Vec<Vec<f64>> = cone.cells().iter().map(|c| c.normals()[0].clone()).collect();
    let mut w = uniform(rows.len());
    let mut log = Vec::new();
    for it in 1..=MAX_ITERATIONS {
        let q = mixture(&w, &rows);
        let g: Vec<f64> = rows.iter().map(|r| kl_divergence(r, &q)).collect();
        let upper = g.iter().cloned().fold(0.0, f64::max);
        let lower = w.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        if upper - lower < tol {
            log.push(format!("converged after {it} iterations, gap {:.3e}", upper - lower));
            return Ok(CapacityResult {
                value: upper,
                lower_bound: lower.max(0.0),
                upper_bound: upper,
                prior: Some(q),
                posteriors: rows,
                method: CapacityMethod::BlahutArimoto,
                iterations: it,
                log,
            });
        }
        reweight(&mut w, &g, 1.0);
    }
    Err(Error::SolverFailure(format!("Blahut-Arimoto did not reach gap {tol:e} in {MAX_ITERATIONS} iterations")))
}

/// Closest point of `hull(normals)` to `q` in KL divergence.
pub(crate) struct Projection {
    pub point: Vec<f64>,
    pub value: f64,
    /// Frank-Wolfe gap of the weight problem; bounds `value - optimum`.
    pub gap: f64,
    pub weights: Vec<f64>,
}

pub(crate) fn project(
    normals: &[Vec<f64>],
    q: &[f64],
    tol: f64,
    start: Option<&[f64]>,
) -> Result<Projection> {
    if normals.len() == 1 {
        return Ok(Projection {
            point: normals[0].clone(),
            value: kl_divergence(&normals[0], q),
            gap: 0.0,
            weights: vec![1.0],
        });
    }
    let d = q.len();
    let point = |lam: &[f64]| {
        let mut p = vec![0.0; d];
        for (l, n) in lam.iter().zip(normals) {
            for (pv, nv) in p.iter_mut().zip(n) {
                *pv += l * nv;
            }
        }
        p
    };
    let f = |lam: &[f64]| kl_divergence(&point(lam), q);
    let grad = |lam: &[f64], g: &mut [f64]| {
        let p = point(lam);
        let v: Vec<f64> = p
            .iter()
            .zip(q)
            .map(|(&pv, &qv)| if pv > 0.0 { (pv / qv).log2() } else { 0.0 })
            .collect();
        for (gj, n) in g.iter_mut().zip(normals) {
            *gj = n.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
    };
    let mut opts = MirrorOptions::new(tol);
    opts.start = start.map(|s| s.to_vec());
    let m = minimize_with(f, grad, &[normals.len()], &opts)?;
    Ok(Projection { point: point(&m.argmin), value: m.value, gap: m.gap, weights: m.argmin })
}

/// Generalized Blahut-Arimoto on the cell weights: each cell is represented by
/// the I-projection of the current prior onto its normal hull.
fn minimax(cone: &DcCone, tol: f64) -> Result<CapacityResult> {
    let cells: Vec<&[Vec<f64>]> = cone.cells().iter().map(|c| c.normals()).collect();
    let k = cells.len();
    let d = cone.dim();
    let inner_tol = (tol * 0.1).max(1e-13);
    let mut w = uniform(k);
    let mut q = uniform(d);
    let mut starts: Vec<Option<Vec<f64>>> = vec![None; k];
    let mut step = 1.0;
    let mut best_gap = f64::INFINITY;
    let mut since_best = 0usize;
    let mut best_lower = f64::NEG_INFINITY;
    let mut log = Vec::new();
    for it in 1..=MAX_ITERATIONS {
        let mut proj = Vec::with_capacity(k);
        for (i, normals) in cells.iter().enumerate() {
            let p = project(normals, &q, inner_tol, starts[i].as_deref())?;
            starts[i] = Some(p.weights.iter().map(|v| v.max(1e-300)).collect());
            proj.push(p);
        }
        let g: Vec<f64> = proj.iter().map(|p| p.value).collect();
        let upper = g.iter().cloned().fold(0.0, f64::max);
        let r = mixture(&w, &proj.iter().map(|p| p.point.clone()).collect::<Vec<_>>());
        let ratio = r.iter().zip(&q).map(|(a, b)| a / b).fold(0.0, f64::max);
        let lower = w.iter().zip(&proj).map(|(wi, p)| wi * (p.value - p.gap)).sum::<f64>()
            + (1.0 - ratio) / std::f64::consts::LN_2;
        best_lower = best_lower.max(lower);
        let gap = upper - best_lower;
        if gap < tol {
            log.push(format!("converged after {it} iterations, gap {gap:.3e}, step {step}"));
            return Ok(CapacityResult {
                value: upper,
                lower_bound: best_lower.max(0.0),
                upper_bound: upper,
                prior: Some(q),
                posteriors: proj.into_iter().map(|p| p.point).collect(),
                method: CapacityMethod::Minimax,
                iterations: it,
                log,
            });
        }
        if gap < best_gap * (1.0 - 1e-3) {
            best_gap = gap;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= 200 && step > 1e-3 {
                step *= 0.5;
                since_best = 0;
                log.push(format!("iteration {it}: gap stalled at {gap:.3e}, step {step}"));
            }
        }
        reweight(&mut w, &g, step);
        q = floored(mixture(&w, &proj.into_iter().map(|p| p.point).collect::<Vec<_>>()));
    }
    Err(Error::SolverFailure(format!("minimax capacity did not reach gap {tol:e} in {MAX_ITERATIONS} iterations")))
}

/// Golden-section minimum of a convex function on `[0, 1]`.
fn golden_min(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - r * (b - a);
    let mut e = a + r * (b - a);
    let (mut fc, mut fe) = (f(c), f(e));
    for _ in 0..80 {
        if fc <= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + r * (b - a);
            fe = f(e);
        }
    }
    let (f0, f1) = (f(0.0), f(1.0));
    let mid = (a + b) / 2.0;
    [(0.0, f0), (1.0, f1), (mid, f(mid))]
        .into_iter()
        .fold((0.0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
}

fn in_hull_low_dim(normals: &[Vec<f64>], q: &[f64]) -> bool {
    const EPS: f64 = 1e-12;
    let n = normals.len();
    let close = |p: &[f64]| p.iter().zip(q).all(|(a, b)| (a - b).abs() <= EPS);
    // Carathéodory: in at most two affine dimensions three points suffice.
    for i in 0..n {
        if close(&normals[i]) {
            return true;
        }
        for j in i + 1..n {
            for l in j + 1..n {
                let (a, b, c) = (&normals[i], &normals[j], &normals[l]);
                if let Some(true) = in_triangle(a, b, c, q) {
                    return true;
                }
            }
            if on_segment(&normals[i], &normals[j], q) {
                return true;
            }
        }
    }
    false
}

fn on_segment(a: &[f64], b: &[f64], q: &[f64]) -> bool {
    let dir: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let len2: f64 = dir.iter().map(|v| v * v).sum();
    if len2 == 0.0 {
        return false;
    }
    let t = dir.iter().zip(q.iter().zip(a)).map(|(d, (x, y))| d * (x - y)).sum::<f64>() / len2;
    if !(-1e-12..=1.0 + 1e-12).contains(&t) {
        return false;
    }
    a.iter().zip(&dir).zip(q).all(|((x, d), v)| (x + t * d - v).abs() <= 1e-12)
}

/// Barycentric test in the first two coordinates (the third is implied).
fn in_triangle(a: &[f64], b: &[f64], c: &[f64], q: &[f64]) -> Option<bool> {
    if q.len() != 3 {
        return None;
    }
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    if det.abs() < 1e-14 {
        return None;
    }
    let u = ((q[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (q[1] - a[1])) / det;
    let v = ((b[0] - a[0]) * (q[1] - a[1]) - (q[0] - a[0]) * (b[1] - a[1])) / det;
    Some(u >= -1e-12 && v >= -1e-12 && u + v <= 1.0 + 1e-12)
}

/// Exact-enough KL projection onto a hull in at most two affine dimensions:
/// zero inside, otherwise the best point on a segment between two normals.
fn project_low_dim(normals: &[Vec<f64>], q: &[f64]) -> (f64, Vec<f64>) {
    if in_hull_low_dim(normals, q) {
        return (0.0, q.to_vec());
    }
    let mut best = (f64::INFINITY, normals[0].clone());
    for (i, a) in normals.iter().enumerate() {
        let v = kl_divergence(a, q);
        if v < best.0 {
            best = (v, a.clone());
        }
        for b in &normals[i + 1..] {
            let seg = |t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect() };
            let (t, v) = golden_min(|t| kl_divergence(&seg(t), q));
            if v < best.0 {
                best = (v, seg(t));
            }
        }
    }
    best
}

fn oracle_grid(cone: &DcCone) -> Result<CapacityResult> {
    let d = cone.dim();
    let steps = (1.0 / GRID_STEP).round() as usize;
    let mut grid: Vec<Vec<f64>> = Vec::new();
    match d {
        1 => grid.push(vec![1.0]),
        2 => (0..=steps).for_each(|i| {
            let t = i as f64 / steps as f64;
            grid.push(vec![t, 1.0 - t]);
        }),
        _ => {
            for i in 0..=steps {
                for j in 0..=steps - i {
                    let (a, b) = (i as f64 / steps as f64, j as f64 / steps as f64);
                    grid.push(vec![a, b, (1.0 - a - b).max(0.0)]);
                }
            }
        }
    }
    let mut best = (f64::INFINITY, Vec::new(), Vec::new());
    for q in grid {
        let mut worst = 0.0f64;
        let mut posts = Vec::with_capacity(cone.cells().len());
        for c in cone.cells() {
            let (v, p) = project_low_dim(c.normals(), &q);
            worst = worst.max(v);
            posts.push(p);
            if worst >= best.0 {
                break;
            }
        }
        if worst < best.0 {
            best = (worst, q, posts);
        }
    }
    Ok(CapacityResult {
        value: best.0,
        lower_bound: f64::NEG_INFINITY,
        upper_bound: best.0,
        prior: Some(best.1),
        posteriors: best.2,
        method: CapacityMethod::OracleGrid,
        iterations: 0,
        log: vec![format!("grid step {GRID_STEP}")],
    })
}

/// `inf { D(p || q) : <p, a> <= 0 }`, via the dual `max_{t >= 0} -log2 sum_y q(y) 2^{-t a(y)}`.
pub fn halfspace_divergence(a: &[f64], q: &[f64]) -> f64 {
    let mean: f64 = a.iter().zip(q).map(|(x, y)| x * y).sum();
    if mean <= 0.0 {
        return 0.0;
    }
    let has_negative = a.iter().zip(q).any(|(&x, &y)| y > 0.0 && x < 0.0);
    if !has_negative {
        let zero_mass: f64 = a.iter().zip(q).filter(|(&x, &y)| y > 0.0 && x <= 0.0).map(|(_, y)| y).sum();
        return -zero_mass.log2();
    }
    // Tilted mean <q_t, a> decreases in t; find its root.
    let tilted_mean = |t: f64| {
        let top = a.iter().zip(q).filter(|(_, &y)| y > 0.0).map(|(x, _)| -t * x).fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for (&x, &y) in a.iter().zip(q) {
            if y > 0.0 {
                let e = y * (-t * x - top).exp2();
                num += e * x;
                den += e;
            }
        }
        num / den
    };
    let mut hi = 1.0;
    while tilted_mean(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tilted_mean(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let top = a.iter().zip(q).filter(|(_, &y)| y > 0.0).map(|(x, _)| -t * x).fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = a.iter().zip(q).filter(|(_, &y)| y > 0.0).map(|(&x, &y)| y * (-t * x - top).exp2()).sum();
    -(s.log2() + top)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullValidation {
    pub cells_checked: usize,
    pub samples: usize,
    /// Largest amount by which a sampled cell portfolio beat the hull value (should be <= 0).
    pub max_sample_excess: f64,
    /// Largest distance between the hull value and the value of the subgradient witness.
    pub max_witness_error: f64,
    /// Largest `<normal, witness>` over all cells (should be <= 0).
    pub max_witness_violation: f64,
}

/// Check the hull reduction at prior `q` against portfolios of each cell: the
/// subgradient witness must attain the hull value and no sampled portfolio may
/// exceed it.
pub fn validate_hull_reduction(cone: &DcCone, q: &[f64], samples: usize, seed: u64) -> Result<HullValidation> {
    if q.len() != cone.dim() {
        return input("prior length differs from alphabet size");
    }
    let d = cone.dim();
    let q = floored(q.to_vec());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = HullValidation {
        cells_checked: 0,
        samples: 0,
        max_sample_excess: f64::NEG_INFINITY,
        max_witness_error: 0.0,
        max_witness_violation: f64::NEG_INFINITY,
    };
    for cell in cone.cells() {
        if cell.is_full() {
            continue;
        }
        out.cells_checked += 1;
        let proj = project(cell.normals(), &q, 1e-10, None)?;
        // Gradient of D(. || q) at the projection, shifted to price it at zero.
        let v: Vec<f64> = proj.point.iter().zip(&q).map(|(&p, &qq)| (p.max(1e-300) / qq).log2()).collect();
        let c: f64 = proj.point.iter().zip(&v).map(|(p, x)| p * x).sum();
        let witness: Vec<f64> = v.iter().map(|x| c - x).collect();
        let scale = witness.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let witness: Vec<f64> = witness.iter().map(|x| x / scale).collect();
        for n in cell.normals() {
            let s: f64 = n.iter().zip(&witness).map(|(a, b)| a * b).sum();
            out.max_witness_violation = out.max_witness_violation.max(s);
        }
        let wv = halfspace_divergence(&witness, &q);
        out.max_witness_error = out.max_witness_error.max((wv - proj.value).abs());
        let mut vertices: Vec<Vec<f64>> = Vec::new();
        for _ in 0..samples {
            let obj: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut lp = LinearProgram::maximize(obj);
            for y in 0..d {
                lp.set_bound(y, Bound::boxed(-1.0, 1.0));
            }
            for n in cell.normals() {
                lp.constrain(n.clone(), Relation::Le, 0.0);
            }
            let r = solve_lp(&lp, 1e-9)?;
            if r.status != LpStatus::Optimal {
                continue;
            }
            vertices.push(r.solution);
        }
        let mut points = vertices.clone();
        for _ in 0..samples {
            if vertices.len() < 2 {
                break;
            }
            let i = rng.gen_range(0..vertices.len());
            let j = rng.gen_range(0..vertices.len());
            let t: f64 = rng.gen();
            points.push(vertices[i].iter().zip(&vertices[j]).map(|(a, b)| (1.0 - t) * a + t * b).collect());
        }
        for a in &points {
            // LP vertices sit on the boundary up to solver error; push them inside.
            let a: Vec<f64> = a.iter().map(|x| x - 1e-9).collect();
            let val = halfspace_divergence(&a, &q);
            out.max_sample_excess = out.max_sample_excess.max(val - proj.value);
            out.samples += 1;
        }
    }
    Ok(out)
}
