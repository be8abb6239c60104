//! From classical coding schemes to winning team strategies.

use serde::{Deserialize, Serialize};

use super::{PrefixTable, TeamStrategy};
use crate::channels::{
    avcf_channel, n_use_cone, requirement_cone, AvcfKernel, BipartiteGraph, DmcKernel, GameChannel, NUseMode,
};
use crate::cone::{checked_pow, degraded_deterministic, sequence_digits};
use crate::error::{input, Error, Result};

/// The probabilistic or combinatorial model a scheme is designed for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum SchemeModel {
    Dmc(DmcKernel),
    DmcFeedback(DmcKernel),
    Avcf(AvcfKernel),
    ZeroError(BipartiteGraph),
    ZeroErrorFeedback(BipartiteGraph),
}

impl SchemeModel {
    /// Every model as an AVCF: feedback inputs become causal inputs, graph
    /// edges become deterministic adversary choices.
    pub fn kernel(&self) -> Result<AvcfKernel> {
        Ok(match self {
            SchemeModel::Dmc(k) => {
                k.validate()?;
                AvcfKernel::from_dmc(k)
            }
            SchemeModel::DmcFeedback(k) => {
                k.validate()?;
                AvcfKernel::from_dmc_feedback(k)
            }
            SchemeModel::Avcf(k) => {
                k.validate()?;
                k.clone()
            }
            SchemeModel::ZeroError(g) => {
                g.validate()?;
                AvcfKernel::from_graph(g)
            }
            SchemeModel::ZeroErrorFeedback(g) => {
                g.validate()?;
                AvcfKernel::from_graph_feedback(g)
            }
        })
    }

    /// The game channel the synthesized strategy plays on.
    pub fn channel(&self) -> Result<GameChannel> {
        avcf_channel(&self.kernel()?)
    }
}

/// Codewords, causal-input policy and decoder of a classical scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodingScheme {
    pub n: usize,
    /// Noncausal input sequence per message.
    pub codewords: Vec<Vec<usize>>,
    /// Causal input per message and output prefix; required when the model has
    /// more than one causal input.
    #[serde(default)]
    pub causal: Option<Vec<PrefixTable<usize>>>,
    /// Decoded message per output sequence (base-`|Y|` index).
    pub decoder: Vec<usize>,
}

impl CodingScheme {
    pub fn messages(&self) -> usize {
        self.codewords.len()
    }

    fn check(&self, k: &AvcfKernel) -> Result<()> {
        let d = k.outputs.len();
        if self.n == 0 || self.codewords.is_empty() {
            return input("scheme needs a positive blocklength and at least one message");
        }
        for (m, cw) in self.codewords.iter().enumerate() {
            if cw.len() != self.n || cw.iter().any(|&x| x >= k.inputs.len()) {
                return input(format!("codeword of message {m} must be {} valid inputs", self.n));
            }
        }
        match &self.causal {
            None if k.causal.len() > 1 => return input("missing causal-input policy entries"),
            None => {}
            Some(t) => {
                if t.len() != self.messages() {
                    return input("causal policy must cover every message");
                }
                for tm in t {
                    if tm.width() != d || tm.depth() != self.n {
                        return input("causal policy must cover every output prefix");
                    }
                    if (0..self.n).any(|i| tm.level(i).iter().any(|&z| z >= k.causal.len())) {
                        return input("causal policy uses an unknown causal input");
                    }
                }
            }
        }
        if Some(self.decoder.len()) != checked_pow(d, self.n) {
            return input("decoder must cover every output sequence");
        }
        if self.decoder.iter().any(|&m| m >= self.messages()) {
            return input("decoder outputs an unknown message");
        }
        Ok(())
    }

    fn causal_at(&self, m: usize, i: usize, index: usize) -> usize {
        self.causal.as_ref().map_or(0, |t| *t[m].at(i, index))
    }
}

/// Worst-case conditional error probabilities `P_e(m, y^i)`, prefix lengths `0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleTable {
    pub tables: Vec<PrefixTable<f64>>,
}

impl MartingaleTable {
    pub fn initial(&self, m: usize) -> f64 {
        *self.tables[m].at(0, 0)
    }

    pub fn get(&self, m: usize, prefix: &[usize]) -> f64 {
        *self.tables[m].get(prefix)
    }
}

/// Backward recursion `P_e(m, y^{i-1}) = max_v <p(.|x_i, z_i, v), P_e(m, y^{i-1}, .)>`
/// from the leaves `1{decoder(y^n) != m}`.
pub fn worst_case_error(scheme: &CodingScheme, model: &SchemeModel) -> Result<(f64, MartingaleTable)> {
    let k = model.kernel()?;
    scheme.check(&k)?;
    let d = k.outputs.len();
    let n = scheme.n;
    let mut tables = Vec::with_capacity(scheme.messages());
    for m in 0..scheme.messages() {
        let mut t = PrefixTable::filled(d, n + 1, 0.0)?;
        for (leaf, v) in t.level_mut(n).iter_mut().enumerate() {
            *v = if scheme.decoder[leaf] == m { 0.0 } else { 1.0 };
        }
        for i in (0..n).rev() {
            let x = scheme.codewords[m][i];
            for idx in 0..t.level(i).len() {
                let z = scheme.causal_at(m, i, idx);
                let children = &t.level(i + 1)[idx * d..(idx + 1) * d];
                let worst = k.rows[x][z]
                    .iter()
                    .map(|row| row.iter().zip(children).map(|(p, c)| p * c).sum::<f64>())
                    .fold(0.0, f64::max);
                *t.at_mut(i, idx) = worst;
            }
        }
        tables.push(t);
    }
    let table = MartingaleTable { tables };
    let eps = (0..scheme.messages()).map(|m| table.initial(m)).fold(0.0, f64::max);
    Ok((eps, table))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisKind {
    /// Portfolios are successive differences of the worst-case error probability.
    Martingale,
    /// Pay 1 on every output the codeword symbol cannot produce.
    ZeroError,
    /// As `ZeroError`, with the input chosen causally from the output prefix.
    ZeroErrorFeedback,
}

pub fn synthesize_strategy(
    kind: SynthesisKind,
    scheme: &CodingScheme,
    model: &SchemeModel,
    tol: f64,
) -> Result<TeamStrategy> {
    let k = model.kernel()?;
    scheme.check(&k)?;
    let channel = model.channel()?;
    let d = k.outputs.len();
    let n = scheme.n;
    let mut policy = Vec::with_capacity(scheme.messages());
    match kind {
        SynthesisKind::Martingale => {
            let (_, table) = worst_case_error(scheme, model)?;
            for m in 0..scheme.messages() {
                let t = &table.tables[m];
                let mut p = PrefixTable::filled(d, n, Vec::new())?;
                for i in 0..n {
                    for idx in 0..t.level(i).len() {
                        let parent = t.at(i, idx);
                        *p.at_mut(i, idx) = (0..d).map(|y| t.at(i + 1, idx * d + y) - parent).collect();
                    }
                }
                policy.push(p);
            }
        }
        SynthesisKind::ZeroError | SynthesisKind::ZeroErrorFeedback => {
            let (g, feedback) = match (kind, model) {
                (SynthesisKind::ZeroError, SchemeModel::ZeroError(g)) => (g, false),
                (SynthesisKind::ZeroErrorFeedback, SchemeModel::ZeroErrorFeedback(g)) => (g, true),
                _ => return input("zero-error synthesis needs the matching bipartite-graph model"),
            };
            for m in 0..scheme.messages() {
                let mut p = PrefixTable::filled(d, n, Vec::new())?;
                for i in 0..n {
                    for idx in 0..p.level(i).len() {
                        let x = if feedback { scheme.causal_at(m, i, idx) } else { scheme.codewords[m][i] };
                        *p.at_mut(i, idx) = (0..d).map(|y| if g.has_edge(x, y) { 0.0 } else { 1.0 }).collect();
                    }
                }
                policy.push(p);
            }
        }
    }
    let strategy = TeamStrategy { codebook: scheme.codewords.clone(), policy, decoder: scheme.decoder.clone() };
    for m in 0..scheme.messages() {
        for i in 0..n {
            for idx in 0..strategy.policy[m].level(i).len() {
                let w = strategy.policy[m].at(i, idx);
                let cone = channel.cone(scheme.codewords[m][i]);
                if !cone.contains_portfolio(w, tol)? {
                    return Err(Error::Synthesis {
                        message: m,
                        step: i + 1,
                        prefix: sequence_digits(idx, d, i),
                        reason: format!("portfolio {w:?} is outside the channel cone"),
                    });
                }
            }
        }
    }
    Ok(strategy)
}

/// Binary repetition code of length `n` with majority decoding (ties go to 0).
pub fn repetition_code(n: usize) -> Result<CodingScheme> {
    let leaves = checked_pow(2, n).ok_or_else(|| Error::Resource("2^n overflows".into()))?;
    let decoder = (0..leaves)
        .map(|i| {
            let ones = sequence_digits(i, 2, n).iter().filter(|&&b| b == 1).count();
            usize::from(2 * ones > n)
        })
        .collect();
    Ok(CodingScheme { n, codewords: vec![vec![0; n], vec![1; n]], causal: None, decoder })
}

fn consistent(g: &BipartiteGraph, codeword: &[usize], ys: &[usize]) -> bool {
    codeword.iter().zip(ys).all(|(&x, &y)| g.has_edge(x, y))
}

/// Decode to the first message whose codeword could have produced the outputs (0 if none).
pub fn consistency_decoder(codewords: &[Vec<usize>], g: &BipartiteGraph, n: usize) -> Result<Vec<usize>> {
    let d = g.outputs.len();
    let leaves = checked_pow(d, n)
        .filter(|&c| c <= super::NODE_CAP)
        .ok_or_else(|| Error::Resource("|Y|^n exceeds the node cap".into()))?;
    Ok((0..leaves)
        .map(|i| {
            let ys = sequence_digits(i, d, n);
            codewords.iter().position(|cw| consistent(g, cw, &ys)).unwrap_or(0)
        })
        .collect())
}

/// Every output sequence the adversary can force from `x^n(m)` decodes to `m`.
pub fn check_zero_error_code(
    codewords: &[Vec<usize>],
    decoder: &[usize],
    g: &BipartiteGraph,
    n: usize,
    messages: usize,
) -> Result<bool> {
    g.validate()?;
    let d = g.outputs.len();
    let leaves = checked_pow(d, n)
        .filter(|&c| c <= super::NODE_CAP)
        .ok_or_else(|| Error::Resource("|Y|^n exceeds the node cap".into()))?;
    if codewords.len() != messages || decoder.len() != leaves {
        return input("code must have L codewords and a decoder on every output sequence");
    }
    if codewords.iter().any(|cw| cw.len() != n || cw.iter().any(|&x| x >= g.inputs.len())) {
        return input("codewords must be n valid input symbols");
    }
    for (m, cw) in codewords.iter().enumerate() {
        // Odometer over the neighbor choices of each position.
        let mut pick = vec![0usize; n];
        'odometer: loop {
            let ys: Vec<usize> = (0..n).map(|i| g.neighbors[cw[i]][pick[i]]).collect();
            if decoder[crate::cone::sequence_index(&ys, d)] != m {
                return Ok(false);
            }
            for i in (0..n).rev() {
                pick[i] += 1;
                if pick[i] < g.neighbors[cw[i]].len() {
                    continue 'odometer;
                }
                pick[i] = 0;
            }
            break;
        }
    }
    Ok(true)
}

/// Does some decoder make the loss requirement a pushforward-subcone of the n-use cone?
pub fn coding_feasible_by_degradedness(
    w: &GameChannel,
    n: usize,
    messages: usize,
    eps: f64,
    tol: f64,
) -> Result<Option<Vec<usize>>> {
    let req = requirement_cone(messages, eps)?;
    if messages == 1 {
        let leaves = checked_pow(w.outputs().len(), n).ok_or_else(|| Error::Resource("|Y|^n overflows".into()))?;
        return Ok(Some(vec![0; leaves]));
    }
    let cone = n_use_cone(w, n, &NUseMode::AllInputs)?;
    degraded_deterministic(&req, &cone, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{verify_game, GameSpec, NODE_CAP};

    fn bsc(beta: f64) -> SchemeModel {
        SchemeModel::Dmc(DmcKernel::bsc(beta).unwrap())
    }

    #[test]
    fn repetition_three_error() {
        let (eps, table) = worst_case_error(&repetition_code(3).unwrap(), &bsc(0.2)).unwrap();
        assert!((eps - 0.104).abs() < 1e-12);
        assert!((table.initial(1) - 0.104).abs() < 1e-12);
    }

    #[test]
    fn martingale_constant_loss() {
        let scheme = repetition_code(3).unwrap();
        let model = bsc(0.2);
        let s = synthesize_strategy(SynthesisKind::Martingale, &scheme, &model, 1e-9).unwrap();
        let spec = GameSpec::new(model.channel().unwrap(), 3, 2, 0.104 + 1e-6).unwrap();
        let r = verify_game(&spec, &s, 1e-9, NODE_CAP).unwrap();
        assert!(r.is_win());
        assert!((r.min_payoff + 0.104).abs() < 1e-12 && (r.max_payoff + 0.104).abs() < 1e-12);
        let lose = GameSpec::new(model.channel().unwrap(), 3, 2, 0.10).unwrap();
        assert!(!verify_game(&lose, &s, 1e-9, NODE_CAP).unwrap().is_win());
    }

    #[test]
    fn adversarial_flip_probability() {
        let b = crate::cone::Alphabet::indexed(2);
        let rows = |x: usize| {
            vec![[0.1, 0.3]
                .iter()
                .map(|&f| if x == 0 { vec![1.0 - f, f] } else { vec![f, 1.0 - f] })
                .collect::<Vec<_>>()]
        };
        let k = AvcfKernel {
            inputs: b.clone(),
            causal: crate::cone::Alphabet::indexed(1),
            adversarial: crate::cone::Alphabet::new(["0.1", "0.3"]).unwrap(),
            outputs: b,
            rows: vec![rows(0), rows(1)],
        };
        let model = SchemeModel::Avcf(k);
        let scheme = repetition_code(3).unwrap();
        let (eps, _) = worst_case_error(&scheme, &model).unwrap();
        assert!((eps - 0.216).abs() < 1e-12);
        let s = synthesize_strategy(SynthesisKind::Martingale, &scheme, &model, 1e-9).unwrap();
        let spec = GameSpec::new(model.channel().unwrap(), 3, 2, 0.216 + 1e-9).unwrap();
        assert!(verify_game(&spec, &s, 1e-9, NODE_CAP).unwrap().is_win());
    }

    #[test]
    fn noiseless_dmc_needs_no_bets() {
        let model = bsc(0.0);
        let s = synthesize_strategy(SynthesisKind::Martingale, &repetition_code(2).unwrap(), &model, 1e-9).unwrap();
        // Only outputs the channel can actually produce must be free of bets.
        for (m, t) in s.policy.iter().enumerate() {
            assert_eq!(t.at(0, 0)[m], 0.0);
            assert_eq!(t.at(1, m)[m], 0.0);
        }
    }

    #[test]
    fn feedback_scheme_with_causal_inputs() {
        // Send the message bit, then repeat whatever was received.
        let model = SchemeModel::DmcFeedback(DmcKernel::bsc(0.1).unwrap());
        let mut causal = Vec::new();
        for m in 0..2 {
            let mut t = PrefixTable::filled(2, 2, 0usize).unwrap();
            *t.at_mut(0, 0) = m;
            *t.at_mut(1, 0) = m;
            *t.at_mut(1, 1) = m;
            causal.push(t);
        }
        let scheme = CodingScheme { n: 2, codewords: vec![vec![0, 0]; 2], causal: Some(causal), decoder: vec![0, 0, 1, 1] };
        let (eps, _) = worst_case_error(&scheme, &model).unwrap();
        assert!((eps - 0.1).abs() < 1e-12);
        let s = synthesize_strategy(SynthesisKind::Martingale, &scheme, &model, 1e-9).unwrap();
        let spec = GameSpec::new(model.channel().unwrap(), 2, 2, 0.1 + 1e-9).unwrap();
        assert!(verify_game(&spec, &s, 1e-9, NODE_CAP).unwrap().is_win());
        let missing = CodingScheme { causal: None, ..scheme };
        assert!(worst_case_error(&missing, &model).is_err());
    }

    #[test]
    fn pentagon_codes() {
        let g = BipartiteGraph::pentagon();
        let code: Vec<Vec<usize>> = (0..5).map(|i| vec![i, (2 * i) % 5]).collect();
        let dec = consistency_decoder(&code, &g, 2).unwrap();
        assert!(check_zero_error_code(&code, &dec, &g, 2, 5).unwrap());
        // No three inputs are pairwise non-adjacent on the pentagon.
        for a in 0..5 {
            for b in 0..5 {
                for c in 0..5 {
                    if a == b || b == c || a == c {
                        continue;
                    }
                    let code = vec![vec![a], vec![b], vec![c]];
                    let dec = consistency_decoder(&code, &g, 1).unwrap();
                    assert!(!check_zero_error_code(&code, &dec, &g, 1, 3).unwrap());
                }
            }
        }
        let complete = BipartiteGraph::new(
            crate::cone::Alphabet::indexed(2),
            crate::cone::Alphabet::indexed(2),
            vec![vec![0, 1], vec![0, 1]],
        )
        .unwrap();
        for dec in [vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]] {
            assert!(!check_zero_error_code(&[vec![0], vec![1]], &dec, &complete, 1, 2).unwrap());
        }
    }

    #[test]
    fn zero_error_strategy_pays_on_non_edges() {
        let g = BipartiteGraph::pentagon();
        let code: Vec<Vec<usize>> = (0..5).map(|i| vec![i, (2 * i) % 5]).collect();
        let decoder = consistency_decoder(&code, &g, 2).unwrap();
        let scheme = CodingScheme { n: 2, codewords: code, causal: None, decoder };
        let model = SchemeModel::ZeroError(g.clone());
        let s = synthesize_strategy(SynthesisKind::ZeroError, &scheme, &model, 1e-9).unwrap();
        let w = s.policy[1].at(0, 0);
        assert_eq!(w, &vec![1.0, 0.0, 0.0, 1.0, 1.0]);
        for eps in [0.01, 0.5, 0.99] {
            let spec = GameSpec::new(model.channel().unwrap(), 2, 5, eps).unwrap();
            let r = verify_game(&spec, &s, 1e-9, NODE_CAP).unwrap();
            assert!(r.is_win());
            assert_eq!(r.paths, 125);
        }
    }

    #[test]
    fn degradedness_feasibility() {
        let w = crate::channels::build_channel(&crate::channels::ChannelSpec::Bsc { beta: 0.2 }).unwrap();
        assert!(coding_feasible_by_degradedness(&w, 1, 2, 0.1, 1e-9).unwrap().is_none());
        let f = coding_feasible_by_degradedness(&w, 3, 2, 0.104, 1e-9).unwrap();
        assert!(f.is_some());
        assert!(coding_feasible_by_degradedness(&w, 2, 1, 0.3, 1e-9).unwrap().is_some());
    }
}
