//! The adversarial-cost game: the adversary names a cost from `T(x_i)` and the
//! team answers with an output, reusing a strategy won on the dual channel.

use serde::{Deserialize, Serialize};

use super::TeamStrategy;
use crate::channels::{dual_channel, GameChannel};
use crate::cone::{sequence_digits, sequence_index, sup_norm};
use crate::error::{input, Error, Result};

#[derive(Debug, Clone)]
pub struct AdversarialCostStrategy {
    pub strategy: TeamStrategy,
    pub costs: GameChannel,
    pub n: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsifyReport {
    pub sequences: usize,
    pub min_payoff: f64,
    /// First adversary play found with payoff below `-eps`, as (message, outputs).
    pub counterexample: Option<(usize, Vec<usize>)>,
}

/// Check every portfolio of `strategy` against the dual of the cost channel and
/// wrap it as an answer rule for the cost game.
pub fn transform_acccg(
    strategy: &TeamStrategy,
    costs: &GameChannel,
    n: usize,
    tol: f64,
) -> Result<AdversarialCostStrategy> {
    let w = dual_channel(costs)?;
    strategy.check_shape(&w, n, strategy.messages())?;
    let d = w.outputs().len();
    for (m, cw) in strategy.codebook.iter().enumerate() {
        for (i, &x) in cw.iter().enumerate() {
            for idx in 0..strategy.policy[m].level(i).len() {
                if !w.cone(x).contains_portfolio(strategy.policy[m].at(i, idx), tol)? {
                    return Err(Error::DualityViolation { message: m, step: i + 1, prefix: sequence_digits(idx, d, i) });
                }
            }
        }
    }
    Ok(AdversarialCostStrategy { strategy: strategy.clone(), costs: costs.clone(), n, tol })
}

impl AdversarialCostStrategy {
    /// Smallest output `y` with `cost(y) + w(y) <= 0`, up to tolerance.
    pub fn respond(&self, message: usize, prefix: &[usize], cost: &[f64]) -> Result<usize> {
        let d = self.costs.outputs().len();
        if cost.len() != d || prefix.len() >= self.n || message >= self.strategy.messages() {
            return input("cost, prefix or message does not fit the game");
        }
        let w = self.strategy.policy[message].at(prefix.len(), sequence_index(prefix, d));
        let slack = self.tol * sup_norm(cost).max(sup_norm(w)).max(1.0);
        (0..d).find(|&y| cost[y] + w[y] <= slack).ok_or_else(|| Error::DualityViolation {
            message,
            step: prefix.len() + 1,
            prefix: prefix.to_vec(),
        })
    }

    /// Play every message against every sequence of costs `gamma * g`, with `g`
    /// from `generators[x]` and `gamma` from `gammas`. Finding no counterexample
    /// proves nothing beyond the sampled costs.
    pub fn falsify(&self, eps: f64, generators: &[Vec<Vec<f64>>], gammas: &[f64], node_cap: usize) -> Result<FalsifyReport> {
        if generators.len() != self.costs.inputs().len() {
            return input("need a generator list for every input");
        }
        for (x, gens) in generators.iter().enumerate() {
            for g in gens {
                if !self.costs.cone(x).contains_portfolio(g, self.tol)? {
                    return input(format!("generator {g:?} is not a cost of input {x}"));
                }
            }
        }
        if gammas.iter().any(|&g| !(g >= 0.0) || !g.is_finite()) {
            return input("scales must be finite and nonnegative");
        }
        let mut report = FalsifyReport { sequences: 0, min_payoff: f64::INFINITY, counterexample: None };
        let mut nodes = 0usize;
        for m in 0..self.strategy.messages() {
            let mut prefix = Vec::with_capacity(self.n);
            self.play(m, &mut prefix, 0.0, eps, generators, gammas, &mut report, &mut nodes, node_cap)?;
        }
        Ok(report)
    }

    #[allow(clippy::too_many_arguments)]
    fn play(
        &self,
        m: usize,
        prefix: &mut Vec<usize>,
        paid: f64,
        eps: f64,
        generators: &[Vec<Vec<f64>>],
        gammas: &[f64],
        report: &mut FalsifyReport,
        nodes: &mut usize,
        node_cap: usize,
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > node_cap {
            return Err(Error::Resource(format!("falsifier exceeded {node_cap} nodes")));
        }
        let d = self.costs.outputs().len();
        if prefix.len() == self.n {
            let decoded = self.strategy.decoder[sequence_index(prefix, d)];
            let payoff = -paid - if decoded == m { 0.0 } else { 1.0 };
            report.sequences += 1;
            report.min_payoff = report.min_payoff.min(payoff);
            if payoff < -eps - self.tol && report.counterexample.is_none() {
                report.counterexample = Some((m, prefix.clone()));
            }
            return Ok(());
        }
        let x = self.strategy.codebook[m][prefix.len()];
        for g in &generators[x] {
            for &gamma in gammas {
                let cost: Vec<f64> = g.iter().map(|v| gamma * v).collect();
                let y = self.respond(m, prefix, &cost)?;
                prefix.push(y);
                self.play(m, prefix, paid + cost[y], eps, generators, gammas, report, nodes, node_cap)?;
                prefix.pop();
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{build_channel, ChannelSpec, DmcKernel};
    use crate::cone::{Alphabet, DcCone};
    use crate::games::{repetition_code, synthesize_strategy, SchemeModel, SynthesisKind, NODE_CAP};

    #[test]
    fn self_dual_halfspaces_transform_the_martingale() {
        let model = SchemeModel::Dmc(DmcKernel::bsc(0.2).unwrap());
        let s = synthesize_strategy(SynthesisKind::Martingale, &repetition_code(3).unwrap(), &model, 1e-9).unwrap();
        let t = build_channel(&ChannelSpec::Bsc { beta: 0.2 }).unwrap();
        let a = transform_acccg(&s, &t, 3, 1e-9).unwrap();
        let gens = vec![
            vec![vec![-1.0, 4.0], vec![1.0, -4.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
            vec![vec![4.0, -1.0], vec![-4.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
        ];
        let r = a.falsify(0.104 + 1e-6, &gens, &[0.0, 0.5, 1.0, 3.0], NODE_CAP).unwrap();
        assert!(r.counterexample.is_none(), "{r:?}");
        assert_eq!(r.sequences, 2 * 16usize.pow(3));
    }

    #[test]
    fn nonpositive_costs_dualize_to_noiseless() {
        let b = Alphabet::indexed(2);
        let t = GameChannel::new(Alphabet::indexed(1), vec![DcCone::nonpositive(b.clone())]).unwrap();
        let w = dual_channel(&t).unwrap();
        let mut s = TeamStrategy::idle(&w, 1, vec![vec![0], vec![0]]).unwrap();
        *s.policy[0].at_mut(0, 0) = vec![0.0, 1.0];
        *s.policy[1].at_mut(0, 0) = vec![1.0, 0.0];
        s.decoder = vec![0, 1];
        let a = transform_acccg(&s, &t, 1, 1e-9).unwrap();
        let gens = vec![vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![-1.0, -1.0]]];
        let r = a.falsify(0.01, &gens, &[0.0, 0.5, 2.0], NODE_CAP).unwrap();
        assert!(r.counterexample.is_none());
        assert!(r.min_payoff >= 0.0);
    }

    #[test]
    fn corrupted_portfolio_is_a_duality_violation() {
        let model = SchemeModel::Dmc(DmcKernel::bsc(0.2).unwrap());
        let mut s = synthesize_strategy(SynthesisKind::Martingale, &repetition_code(3).unwrap(), &model, 1e-9).unwrap();
        *s.policy[1].at_mut(2, 3) = vec![0.5, 0.5];
        let t = build_channel(&ChannelSpec::Bsc { beta: 0.2 }).unwrap();
        match transform_acccg(&s, &t, 3, 1e-9) {
            Err(Error::DualityViolation { message, step, prefix }) => {
                assert_eq!((message, step, prefix), (1, 3, vec![1, 1]));
            }
            other => panic!("expected a duality violation, got {other:?}"),
        }
    }
}
