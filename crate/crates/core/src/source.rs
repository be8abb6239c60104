//! Lossless source coding game: the adversary reveals `x^n` one symbol at a
//! time, the team bets on each symbol and finally names one of `L` messages
//! from which `x^n` must be recovered.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::capacity::project;
use crate::cone::{checked_pow, dot, sequence_digits, sequence_index, DcCone};
use crate::error::{input, Error, Result};
use crate::games::{PrefixTable, VerifyReport, Walk};
use crate::info;
use crate::kernel::{solve_lp, Bound, LinearProgram, LpStatus, Relation};

/// Encoder and decoder of a block code over `X^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceCode {
    pub n: usize,
    /// Sequence reconstructed from each message.
    pub codewords: Vec<Vec<usize>>,
    /// Message per source sequence (base-`|X|` index).
    pub encoder: Vec<usize>,
}

impl SourceCode {
    pub fn messages(&self) -> usize {
        self.codewords.len()
    }

    /// Encoder sends every listed sequence to its own message and everything
    /// else to message 0.
    pub fn from_codewords(symbols: usize, n: usize, codewords: Vec<Vec<usize>>) -> Result<Self> {
        let leaves = leaves(symbols, n)?;
        if codewords.is_empty() {
            return input("a source code needs at least one codeword");
        }
        let mut encoder = vec![0; leaves];
        let mut seen = vec![false; leaves];
        for (m, cw) in codewords.iter().enumerate() {
            if cw.len() != n || cw.iter().any(|&x| x >= symbols) {
                return input(format!("codeword {m} must be {n} valid symbols"));
            }
            let idx = sequence_index(cw, symbols);
            if std::mem::replace(&mut seen[idx], true) {
                return input(format!("codeword {m} repeats an earlier one"));
            }
            encoder[idx] = m;
        }
        Ok(SourceCode { n, codewords, encoder })
    }

    fn check(&self, symbols: usize) -> Result<()> {
        let leaves = leaves(symbols, self.n)?;
        if self.codewords.is_empty()
            || self.codewords.iter().any(|c| c.len() != self.n || c.iter().any(|&x| x >= symbols))
        {
            return input("codewords must be nonempty sequences of length n over the alphabet");
        }
        if self.encoder.len() != leaves || self.encoder.iter().any(|&m| m >= self.messages()) {
            return input("encoder must map every source sequence to a message");
        }
        Ok(())
    }

    /// Whether sequence `idx` survives encoding and decoding.
    pub fn recovers(&self, idx: usize, symbols: usize) -> bool {
        sequence_index(&self.codewords[self.encoder[idx]], symbols) == idx
    }

    /// Probability of a decoding error under i.i.d. `p`.
    pub fn error_probability(&self, p: &[f64]) -> Result<f64> {
        self.check(p.len())?;
        let mut err = 0.0;
        for idx in 0..self.encoder.len() {
            if !self.recovers(idx, p.len()) {
                err += sequence_probability(p, &sequence_digits(idx, p.len(), self.n));
            }
        }
        Ok(err)
    }
}

fn leaves(symbols: usize, n: usize) -> Result<usize> {
    if symbols == 0 || n == 0 {
        return input("alphabet and blocklength must be positive");
    }
    checked_pow(symbols, n).ok_or_else(|| Error::Resource("|X|^n overflows".into()))
}

fn sequence_probability(p: &[f64], seq: &[usize]) -> f64 {
    seq.iter().map(|&x| p[x]).product()
}

/// The `L` most probable sequences under `p` (ties to the smaller index).
pub fn best_lossless_code(p: &[f64], n: usize, messages: usize) -> Result<SourceCode> {
    let total = leaves(p.len(), n)?;
    if messages == 0 {
        return input("need at least one message");
    }
    let mut order: Vec<(f64, usize)> =
        (0..total).map(|i| (sequence_probability(p, &sequence_digits(i, p.len(), n)), i)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut kept: Vec<usize> = order.iter().take(messages.min(total)).map(|&(_, i)| i).collect();
    kept.sort_unstable();
    SourceCode::from_codewords(p.len(), n, kept.iter().map(|&i| sequence_digits(i, p.len(), n)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceGameSpec {
    pub cone: DcCone,
    pub n: usize,
    pub messages: usize,
    pub eps: f64,
    pub policy: PrefixTable<Vec<f64>>,
    pub code: SourceCode,
}

/// Exhaustive over all `|X|^n` source sequences.
pub fn verify_source_game(spec: &SourceGameSpec, tol: f64, node_cap: usize) -> Result<VerifyReport> {
    let d = spec.cone.dim();
    spec.code.check(d)?;
    if spec.code.n != spec.n || spec.code.messages() > spec.messages {
        return input(format!("code must have blocklength {} and at most {} messages", spec.n, spec.messages));
    }
    let t = &spec.policy;
    if t.width() != d || t.depth() != spec.n || (0..spec.n).any(|i| t.level(i).iter().any(|w| w.len() != d)) {
        return input("policy does not match the alphabet and blocklength");
    }
    if !(spec.eps > 0.0 && spec.eps < 1.0) {
        return input("maximum loss must lie in (0, 1)");
    }
    let code = &spec.code;
    let loss = |_: usize, leaf: usize| if code.recovers(leaf, d) { 0.0 } else { 1.0 };
    Walk {
        cones: vec![&spec.cone],
        n: spec.n,
        codebook: &[vec![0; spec.n]],
        policy: std::slice::from_ref(&spec.policy),
        loss: &loss,
        eps: spec.eps,
        prefix_rule: false,
        tol,
        node_cap,
    }
    .run()
}

/// Portfolios are differences of the conditional error probability given the prefix.
pub fn synthesize_source_strategy(p: &[f64], code: &SourceCode, tol: f64) -> Result<PrefixTable<Vec<f64>>> {
    let p = crate::cone::normalize(p)?;
    code.check(p.len())?;
    let d = p.len();
    let n = code.n;
    let mut err = PrefixTable::filled(d, n + 1, 0.0)?;
    for idx in 0..err.level(n).len() {
        *err.at_mut(n, idx) = if code.recovers(idx, d) { 0.0 } else { 1.0 };
    }
    for i in (0..n).rev() {
        for idx in 0..err.level(i).len() {
            *err.at_mut(i, idx) = (0..d).map(|x| p[x] * err.at(i + 1, idx * d + x)).sum();
        }
    }
    let mut policy = PrefixTable::filled(d, n, Vec::new())?;
    for i in 0..n {
        for idx in 0..policy.level(i).len() {
            let parent = err.at(i, idx);
            let w: Vec<f64> = (0..d).map(|x| err.at(i + 1, idx * d + x) - parent).collect();
            let price = dot(&p, &w);
            if price > tol {
                return Err(Error::Synthesis {
                    message: 0,
                    step: i + 1,
                    prefix: sequence_digits(idx, d, i),
                    reason: format!("martingale difference has price {price}"),
                });
            }
            *policy.at_mut(i, idx) = w;
        }
    }
    Ok(policy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMethod {
    GeneratorForm,
    HalfspaceClosedForm,
    SearchUpperBound,
}

impl std::str::FromStr for EntropyMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generator_form" | "generators" => Ok(EntropyMethod::GeneratorForm),
            "halfspace_closed_form" | "halfspace" => Ok(EntropyMethod::HalfspaceClosedForm),
            "search_upper_bound" | "search" => Ok(EntropyMethod::SearchUpperBound),
            _ => input(format!("unknown entropy method \"{s}\"")),
        }
    }
}

/// What the cone is known by.
#[derive(Debug, Clone, Copy)]
pub enum EntropyInput<'a> {
    Cone(&'a DcCone),
    /// The cone generated by these portfolios under scaling and decrease.
    Generators(&'a [Vec<f64>]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    /// Bits; `-inf` for the full cone, `+inf` for the empty cone.
    pub value: f64,
    /// False when `value` is only an upper bound.
    pub certified: bool,
    pub method: EntropyMethod,
}

/// `sup { H(p) : <p, a> <= 0 }` in bits; `-inf` when no distribution qualifies.
pub fn max_entropy_under(a: &[f64]) -> f64 {
    let d = a.len();
    let min = a.iter().copied().fold(f64::INFINITY, f64::min);
    if a.iter().sum::<f64>() <= 0.0 {
        return (d as f64).log2();
    }
    if min > 0.0 {
        return f64::NEG_INFINITY;
    }
    if min == 0.0 {
        return (a.iter().filter(|&&v| v == 0.0).count() as f64).log2();
    }
    // Gibbs family p ∝ exp(-lambda a): the tilted mean falls from positive to `min`.
    let gibbs = |lam: f64| -> Vec<f64> {
        let w: Vec<f64> = a.iter().map(|&v| (-lam * (v - min)).exp()).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|v| v / z).collect()
    };
    let mut hi = 1.0;
    while dot(&gibbs(hi), a) > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dot(&gibbs(mid), a) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    info::entropy(&gibbs(hi))
}

/// Number of random-objective LPs per cell for the search method.
pub const SEARCH_SAMPLES: usize = 64;

pub fn entropy(input_cone: EntropyInput<'_>, method: EntropyMethod, tol: f64, seed: u64) -> Result<EntropyValue> {
    let value = match (method, input_cone) {
        (EntropyMethod::GeneratorForm, EntropyInput::Generators(gens)) => {
            if gens.is_empty() {
                f64::INFINITY
            } else {
                let d = gens[0].len();
                if d == 0 || gens.iter().any(|g| g.len() != d || g.iter().any(|v| !v.is_finite())) {
                    return input("generators must be finite vectors of one common length");
                }
                gens.iter().map(|g| max_entropy_under(g)).fold(f64::INFINITY, f64::min)
            }
        }
        (EntropyMethod::HalfspaceClosedForm, EntropyInput::Cone(c)) => {
            match c.cells() {
                [cell] if cell.normals().len() == 1 => info::entropy(&cell.normals()[0]),
                _ => return input("closed form needs a single-halfspace cone"),
            }
        }
        (EntropyMethod::SearchUpperBound, EntropyInput::Cone(c)) => {
            return search_upper_bound(c, tol, seed);
        }
        _ => return input("entropy method does not match how the cone is given"),
    };
    Ok(EntropyValue { value, certified: true, method })
}

/// Each candidate portfolio found in a cell certifies an upper bound.
/// Candidates: zero, the cross-entropy portfolio of the maximum-entropy point
/// of the cell's normal hull, and vertices of the cell cut by a box.
fn search_upper_bound(cone: &DcCone, tol: f64, seed: u64) -> Result<EntropyValue> {
    let method = EntropyMethod::SearchUpperBound;
    if cone.has_full_cell() {
        return Ok(EntropyValue { value: f64::NEG_INFINITY, certified: true, method });
    }
    if cone.is_empty_cone() {
        return Ok(EntropyValue { value: f64::INFINITY, certified: true, method });
    }
    let d = cone.dim();
    let uniform = vec![1.0 / d as f64; d];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for cell in cone.cells() {
        let normals = cell.normals();
        best = best.min((d as f64).log2());
        let hull = project(normals, &uniform, tol.max(1e-12), None)?;
        let h = info::entropy(&hull.point);
        let candidate: Vec<f64> = hull.point.iter().map(|&p| -p.max(1e-300).log2() - h).collect();
        if cell.contains(&candidate, tol) {
            best = best.min(max_entropy_under(&candidate));
        }
        for _ in 0..SEARCH_SAMPLES {
            let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut lp = LinearProgram::maximize(c);
            for nrm in normals {
                lp.constrain(nrm.clone(), Relation::Le, 0.0);
            }
            for y in 0..d {
                lp.set_bound(y, Bound::boxed(-1.0, 1.0));
            }
            let r = solve_lp(&lp, 1e-12)?;
            if r.status == LpStatus::Optimal && cell.contains(&r.solution, tol) {
                best = best.min(max_entropy_under(&r.solution));
            }
        }
    }
    Ok(EntropyValue { value: best, certified: false, method })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanovBound {
    pub size: u128,
    /// `sup { H(p) : <p, a> <= threshold }` in bits.
    pub exponent: f64,
    /// `(n + 1)^{|X|} 2^{n exponent}`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SanovScheme {
    /// Sequences whose average payoff is below `(1 - eps) / gamma`.
    pub set: Vec<Vec<usize>>,
    pub code: SourceCode,
    /// Constant portfolio `(gamma / n) a` at every prefix.
    pub policy: PrefixTable<Vec<f64>>,
    pub bound: SanovBound,
}

/// Compositions of `n` into `parts` nonnegative counts.
fn types(n: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(left - c, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, parts, &mut Vec::new(), &mut out);
    out
}

fn multinomial(counts: &[usize]) -> u128 {
    let mut total = 0u128;
    let mut acc = 1u128;
    for &c in counts {
        for j in 1..=c as u128 {
            total += 1;
            acc = acc * total / j;
        }
    }
    acc
}

fn in_set(counts: &[usize], a: &[f64], threshold: f64, n: usize) -> bool {
    counts.iter().zip(a).map(|(&c, &v)| c as f64 * v).sum::<f64>() / (n as f64) < threshold
}

/// `|S|` by type classes, without listing `S`.
pub fn sanov_set_size(a: &[f64], gamma: f64, eps: f64, n: usize) -> Result<u128> {
    check_sanov(a, gamma, eps, n)?;
    let threshold = (1.0 - eps) / gamma;
    Ok(types(n, a.len()).iter().filter(|t| in_set(t, a, threshold, n)).map(|t| multinomial(t)).sum())
}

fn check_sanov(a: &[f64], gamma: f64, eps: f64, n: usize) -> Result<()> {
    if a.is_empty() || a.iter().any(|v| !v.is_finite()) {
        return input("portfolio must be a nonempty finite vector");
    }
    if !(gamma > 0.0) || !(eps > 0.0 && eps < 1.0) || n == 0 {
        return input("need gamma > 0, eps in (0, 1) and n >= 1");
    }
    Ok(())
}

pub fn sanov_scheme(a: &[f64], gamma: f64, eps: f64, n: usize, cap: usize) -> Result<SanovScheme> {
    check_sanov(a, gamma, eps, n)?;
    let d = a.len();
    let total = leaves(d, n)?;
    if total > cap {
        return Err(Error::Resource(format!("|X|^n = {total} is above the cap of {cap}")));
    }
    let threshold = (1.0 - eps) / gamma;
    let mut set = Vec::new();
    let mut size = 0u128;
    for t in types(n, d).iter().filter(|t| in_set(t, a, threshold, n)) {
        size += multinomial(t);
        permutations_of_type(&mut Vec::with_capacity(n), &mut t.clone(), &mut set);
    }
    set.sort_by_key(|s| sequence_index(s, d));
    let shifted: Vec<f64> = a.iter().map(|v| v - threshold).collect();
    let exponent = max_entropy_under(&shifted);
    let bound = ((n + 1) as f64).powi(d as i32) * (n as f64 * exponent).exp2();
    let code = SourceCode::from_codewords(d, n, if set.is_empty() { vec![vec![0; n]] } else { set.clone() })?;
    let w: Vec<f64> = a.iter().map(|v| gamma / n as f64 * v).collect();
    let policy = PrefixTable::filled(d, n, w)?;
    Ok(SanovScheme { set, code, policy, bound: SanovBound { size, exponent, bound, holds: size as f64 <= bound } })
}

fn permutations_of_type(cur: &mut Vec<usize>, counts: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if counts.iter().all(|&c| c == 0) {
        out.push(cur.clone());
        return;
    }
    for x in 0..counts.len() {
        if counts[x] > 0 {
            counts[x] -= 1;
            cur.push(x);
            permutations_of_type(cur, counts, out);
            cur.pop();
            counts[x] += 1;
        }
    }
}
