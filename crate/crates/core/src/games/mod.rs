//! Deterministic channel coding games: strategies, exhaustive verification,
//! synthesis from classical codes, and the worked scenarios built on them.

mod acccg;
mod json;
mod mail;
mod synth;

pub use acccg::{transform_acccg, AdversarialCostStrategy, FalsifyReport};
pub use mail::{mail_constant_loss, mail_insurance, verify_mail, MailInsurance, MAIL_CAP};
pub use synth::{
    check_zero_error_code, coding_feasible_by_degradedness, consistency_decoder, repetition_code,
    synthesize_strategy, worst_case_error, CodingScheme, MartingaleTable, SchemeModel, SynthesisKind,
};

use serde::{Deserialize, Serialize};

use crate::channels::GameChannel;
use crate::cone::{checked_pow, DcCone};
use crate::error::{input, Error, Result};

/// Default bound on visited game-tree nodes.
pub const NODE_CAP: usize = 10_000_000;
/// At most this many violations are kept in a report.
const VIOLATION_KEEP: usize = 100;

/// Values indexed by output prefixes `y^i`, one dense level per length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable<T>")]
pub struct PrefixTable<T> {
    width: usize,
    levels: Vec<Vec<T>>,
}

#[derive(Deserialize)]
struct RawTable<T> {
    width: usize,
    levels: Vec<Vec<T>>,
}

impl<T> TryFrom<RawTable<T>> for PrefixTable<T> {
    type Error = Error;

    fn try_from(raw: RawTable<T>) -> Result<Self> {
        for (i, level) in raw.levels.iter().enumerate() {
            if Some(level.len()) != checked_pow(raw.width, i) {
                return input(format!("prefix level {i} must have width^{i} entries"));
            }
        }
        Ok(PrefixTable { width: raw.width, levels: raw.levels })
    }
}

impl<T: Clone> PrefixTable<T> {
    /// Levels for prefix lengths `0..depth`.
    pub fn filled(width: usize, depth: usize, value: T) -> Result<Self> {
        let mut levels = Vec::with_capacity(depth);
        for i in 0..depth {
            let size = checked_pow(width, i)
                .filter(|&s| s <= NODE_CAP)
                .ok_or_else(|| Error::Resource(format!("prefix level {i} exceeds {NODE_CAP} entries")))?;
            levels.push(vec![value.clone(); size]);
        }
        Ok(PrefixTable { width, levels })
    }
}

impl<T> PrefixTable<T> {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, i: usize) -> &[T] {
        &self.levels[i]
    }

    pub fn level_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.levels[i]
    }

    pub fn at(&self, len: usize, index: usize) -> &T {
        &self.levels[len][index]
    }

    pub fn at_mut(&mut self, len: usize, index: usize) -> &mut T {
        &mut self.levels[len][index]
    }

    pub fn get(&self, prefix: &[usize]) -> &T {
        &self.levels[prefix.len()][crate::cone::sequence_index(prefix, self.width)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub channel: GameChannel,
    pub n: usize,
    #[serde(rename = "L")]
    pub messages: usize,
    pub eps: f64,
    /// Also require every running payoff to stay at or above `-eps`.
    #[serde(default)]
    pub prefix_rule: bool,
}

impl GameSpec {
    pub fn new(channel: GameChannel, n: usize, messages: usize, eps: f64) -> Result<Self> {
        let s = GameSpec { channel, n, messages, eps, prefix_rule: false };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.messages == 0 {
            return input("blocklength and message count must be at least 1");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return input("maximum loss must lie in (0, 1)");
        }
        Ok(())
    }
}

/// Codebook, portfolio policy and decoder of the team.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamStrategy {
    /// Input sequence per message.
    pub codebook: Vec<Vec<usize>>,
    /// Portfolio per message and output prefix, prefix lengths `0..n`.
    pub policy: Vec<PrefixTable<Vec<f64>>>,
    /// Decoded message per output sequence (base-`|Y|` index).
    pub decoder: Vec<usize>,
}

impl TeamStrategy {
    /// Zero portfolios, constant decoder.
    pub fn idle(channel: &GameChannel, n: usize, codebook: Vec<Vec<usize>>) -> Result<Self> {
        let d = channel.outputs().len();
        let leaves = checked_pow(d, n).ok_or_else(|| Error::Resource("|Y|^n overflows".into()))?;
        let table = PrefixTable::filled(d, n, vec![0.0; d])?;
        Ok(TeamStrategy { policy: vec![table; codebook.len()], codebook, decoder: vec![0; leaves] })
    }

    pub fn messages(&self) -> usize {
        self.codebook.len()
    }

    pub(crate) fn check_shape(&self, channel: &GameChannel, n: usize, messages: usize) -> Result<()> {
        let d = channel.outputs().len();
        if self.codebook.len() != messages || self.policy.len() != messages {
            return input(format!("strategy covers {} messages, game has {messages}", self.codebook.len()));
        }
        for (m, cw) in self.codebook.iter().enumerate() {
            if cw.len() != n || cw.iter().any(|&x| x >= channel.inputs().len()) {
                return input(format!("codeword of message {m} must be {n} valid input symbols"));
            }
            let t = &self.policy[m];
            if t.width() != d || t.depth() != n || t.levels.iter().flatten().any(|w| w.len() != d) {
                return input(format!("policy of message {m} does not match the channel and blocklength"));
            }
        }
        if Some(self.decoder.len()) != checked_pow(d, n) || self.decoder.iter().any(|&m| m >= messages) {
            return input("decoder must map every output sequence to a message");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Win,
    Lose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// The portfolio is not in the cone of the input used at that step.
    Membership,
    /// A running payoff fell below `-eps` under the prefix rule.
    Deficit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: usize,
    /// 1-based step.
    pub step: usize,
    pub prefix: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstPath {
    pub message: usize,
    pub outputs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub verdict: Verdict,
    pub min_payoff: f64,
    pub max_payoff: f64,
    pub worst_path: Option<WorstPath>,
    pub violations: Vec<Violation>,
    /// Violations found, including those not kept.
    pub violation_count: usize,
    pub nodes: usize,
    pub paths: usize,
}

impl VerifyReport {
    pub fn is_win(&self) -> bool {
        self.verdict == Verdict::Win
    }
}

/// Everything the exhaustive walk needs; `loss(m, y^n)` is the final penalty.
pub(crate) struct Walk<'a> {
    pub cones: Vec<&'a DcCone>,
    pub n: usize,
    pub codebook: &'a [Vec<usize>],
    pub policy: &'a [PrefixTable<Vec<f64>>],
    pub loss: &'a dyn Fn(usize, usize) -> f64,
    pub eps: f64,
    pub prefix_rule: bool,
    pub tol: f64,
    pub node_cap: usize,
}

struct WalkState {
    report: VerifyReport,
    prefix: Vec<usize>,
}

impl Walk<'_> {
    pub fn run(&self) -> Result<VerifyReport> {
        let d = self.cones.first().map_or(0, |c| c.dim());
        let mut total = 0usize;
        for i in 0..=self.n {
            let level = checked_pow(d, i).and_then(|c| c.checked_mul(self.codebook.len()));
            total = level.and_then(|l| total.checked_add(l)).unwrap_or(usize::MAX);
        }
        if total > self.node_cap {
            return Err(Error::Resource(format!(
                "game tree has {total} nodes, above the cap of {}",
                self.node_cap
            )));
        }
        let mut st = WalkState {
            report: VerifyReport {
                verdict: Verdict::Win,
                min_payoff: f64::INFINITY,
                max_payoff: f64::NEG_INFINITY,
                worst_path: None,
                violations: Vec::new(),
                violation_count: 0,
                nodes: 0,
                paths: 0,
            },
            prefix: Vec::with_capacity(self.n),
        };
        for m in 0..self.codebook.len() {
            self.visit(m, 0, 0, 0.0, &mut st)?;
        }
        let r = &mut st.report;
        if r.violation_count > 0 || r.min_payoff < -self.eps - self.tol {
            r.verdict = Verdict::Lose;
        }
        Ok(st.report)
    }

    fn record(&self, st: &mut WalkState, v: Violation) {
        st.report.violation_count += 1;
        if st.report.violations.len() < VIOLATION_KEEP {
            st.report.violations.push(v);
        }
    }

    fn visit(&self, m: usize, i: usize, index: usize, sum: f64, st: &mut WalkState) -> Result<()> {
        st.report.nodes += 1;
        if i == self.n {
            let payoff = sum - (self.loss)(m, index);
            st.report.paths += 1;
            st.report.max_payoff = st.report.max_payoff.max(payoff);
            if payoff < st.report.min_payoff {
                st.report.min_payoff = payoff;
                st.report.worst_path = Some(WorstPath { message: m, outputs: st.prefix.clone() });
            }
            return Ok(());
        }
        let cone = self.cones[self.codebook[m][i]];
        let w = self.policy[m].at(i, index);
        if !cone.contains_portfolio(w, self.tol)? {
            self.record(
                st,
                Violation {
                    kind: ViolationKind::Membership,
                    message: m,
                    step: i + 1,
                    prefix: st.prefix.clone(),
                    detail: format!("portfolio {w:?} is outside the cone of the chosen input"),
                },
            );
        }
        let d = cone.dim();
        for (y, &wy) in w.iter().enumerate() {
            let next = sum + wy;
            st.prefix.push(y);
            if self.prefix_rule && next < -self.eps - self.tol {
                self.record(
                    st,
                    Violation {
                        kind: ViolationKind::Deficit,
                        message: m,
                        step: i + 1,
                        prefix: st.prefix.clone(),
                        detail: format!("running payoff {next} below -eps"),
                    },
                );
            }
            self.visit(m, i + 1, index * d + y, next, st)?;
            st.prefix.pop();
        }
        Ok(())
    }
}

/// Exhaustive check of every message and every output sequence.
pub fn verify_game(spec: &GameSpec, strategy: &TeamStrategy, tol: f64, node_cap: usize) -> Result<VerifyReport> {
    spec.validate()?;
    strategy.check_shape(&spec.channel, spec.n, spec.messages)?;
    let decoder = &strategy.decoder;
    let loss = |m: usize, leaf: usize| if decoder[leaf] == m { 0.0 } else { 1.0 };
    Walk {
        cones: spec.channel.cones().iter().collect(),
        n: spec.n,
        codebook: &strategy.codebook,
        policy: &strategy.policy,
        loss: &loss,
        eps: spec.eps,
        prefix_rule: spec.prefix_rule,
        tol,
        node_cap,
    }
    .run()
}
