//! Channel families as maps from inputs to pricing cones.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::cone::{checked_pow, semidirect_explicit, sequence_digits, Alphabet, DcCone};
use crate::error::{input, Error, Result};

/// Row sums must be within this of 1.
const ROW_SUM_TOL: f64 = 1e-9;
/// Largest output alphabet accepted by the n-use construction.
pub const NUSE_CAP: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct GameChannel {
    inputs: Alphabet,
    outputs: Alphabet,
    cones: Vec<DcCone>,
}

impl GameChannel {
    pub fn new(inputs: Alphabet, cones: Vec<DcCone>) -> Result<Self> {
        if cones.len() != inputs.len() {
            return input("every input symbol needs a cone");
        }
        let outputs = cones[0].alphabet().clone();
        if cones.iter().any(|c| c.alphabet() != &outputs) {
            return input("all cones of a channel must share one output alphabet");
        }
        Ok(GameChannel { inputs, outputs, cones })
    }

    pub fn inputs(&self) -> &Alphabet {
        &self.inputs
    }

    pub fn outputs(&self) -> &Alphabet {
        &self.outputs
    }

    pub fn cone(&self, x: usize) -> &DcCone {
        &self.cones[x]
    }

    pub fn cones(&self) -> &[DcCone] {
        &self.cones
    }

    /// `W(X)`, the union of the cones of all inputs.
    pub fn range_cone(&self) -> DcCone {
        let cells = self.cones.iter().flat_map(|c| c.cells().iter().cloned()).collect();
        DcCone::from_parts(self.outputs.clone(), cells)
    }

    pub fn to_json(&self) -> Value {
        let mut cones = Map::new();
        for (x, c) in self.cones.iter().enumerate() {
            cones.insert(self.inputs.label(x).to_string(), c.to_json());
        }
        serde_json::json!({
            "kind": "explicit",
            "inputs": self.inputs.symbols(),
            "cones": Value::Object(cones),
        })
    }

    /// Accepts the explicit form and every parametrized family.
    pub fn from_json(value: &Value) -> Result<Self> {
        if value.get("kind").and_then(Value::as_str) == Some("explicit") {
            let inputs: Vec<String> = serde_json::from_value(value.get("inputs").cloned().unwrap_or(Value::Null))
                .map_err(|e| Error::Input(format!("bad explicit channel inputs: {e}")))?;
            let inputs = Alphabet::new(inputs)?;
            let cones = value
                .get("cones")
                .and_then(Value::as_object)
                .ok_or_else(|| Error::Input("explicit channel needs a \"cones\" object".into()))?;
            let mut out = Vec::with_capacity(inputs.len());
            for x in inputs.symbols() {
                let c = cones.get(x).ok_or_else(|| Error::Input(format!("no cone for input {x:?}")))?;
                out.push(DcCone::from_json(c)?);
            }
            return GameChannel::new(inputs, out);
        }
        let spec: ChannelSpec = serde_json::from_value(value.clone())
            .map_err(|e| Error::Input(format!("bad channel JSON: {e}")))?;
        build_channel(&spec)
    }
}

impl Serialize for GameChannel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for GameChannel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        GameChannel::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Stochastic matrix `p(y|x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmcKernel {
    pub inputs: Alphabet,
    pub outputs: Alphabet,
    pub rows: Vec<Vec<f64>>,
}

fn check_row(row: &[f64], dim: usize, what: &str) -> Result<()> {
    if row.len() != dim {
        return input(format!("{what} has length {} but the output alphabet has {dim}", row.len()));
    }
    if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return input(format!("{what} has a negative or non-finite entry"));
    }
    let s: f64 = row.iter().sum();
    if (s - 1.0).abs() > ROW_SUM_TOL {
        return input(format!("{what} sums to {s}, not 1"));
    }
    Ok(())
}

impl DmcKernel {
    pub fn new(inputs: Alphabet, outputs: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = DmcKernel { inputs, outputs, rows };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.len() != self.inputs.len() {
            return input("DMC needs one row per input");
        }
        for (x, r) in self.rows.iter().enumerate() {
            check_row(r, self.outputs.len(), &format!("row {x}"))?;
        }
        Ok(())
    }

    pub fn bsc(beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return input("crossover probability must lie in [0, 1]");
        }
        let b = Alphabet::indexed(2);
        DmcKernel::new(b.clone(), b, vec![vec![1.0 - beta, beta], vec![beta, 1.0 - beta]])
    }
}

/// Which outputs each input can produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    pub inputs: Alphabet,
    pub outputs: Alphabet,
    /// Sorted output indices reachable from each input.
    pub neighbors: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(inputs: Alphabet, outputs: Alphabet, mut neighbors: Vec<Vec<usize>>) -> Result<Self> {
        for n in neighbors.iter_mut() {
            n.sort_unstable();
            n.dedup();
        }
        let g = BipartiteGraph { inputs, outputs, neighbors };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.neighbors.len() != self.inputs.len() {
            return input("graph needs a neighbor list per input");
        }
        for (x, n) in self.neighbors.iter().enumerate() {
            if n.is_empty() {
                return input(format!("input {x} has no outputs"));
            }
            if n.iter().any(|&y| y >= self.outputs.len()) {
                return input(format!("input {x} references an unknown output"));
            }
        }
        Ok(())
    }

    /// Five inputs on a cycle: `x` can produce `x` or `x + 1 mod 5`, so two
    /// inputs are confusable exactly when they are adjacent on the pentagon.
    pub fn pentagon() -> Self {
        let a = Alphabet::indexed(5);
        BipartiteGraph::new(a.clone(), a, (0..5).map(|x| vec![x, (x + 1) % 5]).collect())
            .expect("pentagon graph is valid")
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.neighbors[x].binary_search(&y).is_ok()
    }

    pub fn confusable(&self, x: usize, other: usize) -> bool {
        self.neighbors[x].iter().any(|&y| self.has_edge(other, y))
    }
}

/// `p(y | x, z, v)` with noncausal input `x`, causal input `z` and adversarial input `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvcfKernel {
    pub inputs: Alphabet,
    pub causal: Alphabet,
    pub adversarial: Alphabet,
    pub outputs: Alphabet,
    /// `rows[x][z][v]`.
    pub rows: Vec<Vec<Vec<Vec<f64>>>>,
}

impl AvcfKernel {
    pub fn validate(&self) -> Result<()> {
        if self.rows.len() != self.inputs.len() {
            return input("AVCF needs rows for every input");
        }
        for (x, by_z) in self.rows.iter().enumerate() {
            if by_z.len() != self.causal.len() {
                return input(format!("input {x} needs rows for every causal input"));
            }
            for (z, by_v) in by_z.iter().enumerate() {
                if by_v.len() != self.adversarial.len() {
                    return input(format!("input ({x}, {z}) needs rows for every adversary action"));
                }
                for (v, r) in by_v.iter().enumerate() {
                    check_row(r, self.outputs.len(), &format!("row ({x}, {z}, {v})"))?;
                }
            }
        }
        Ok(())
    }

    pub fn row(&self, x: usize, z: usize, v: usize) -> &[f64] {
        &self.rows[x][z][v]
    }

    /// A DMC seen as an AVCF with trivial causal and adversarial inputs.
    pub fn from_dmc(k: &DmcKernel) -> Self {
        AvcfKernel {
            inputs: k.inputs.clone(),
            causal: Alphabet::indexed(1),
            adversarial: Alphabet::indexed(1),
            outputs: k.outputs.clone(),
            rows: k.rows.iter().map(|r| vec![vec![r.clone()]]).collect(),
        }
    }

    /// With feedback every input is chosen causally; the noncausal input is trivial.
    pub fn from_dmc_feedback(k: &DmcKernel) -> Self {
        AvcfKernel {
            inputs: Alphabet::indexed(1),
            causal: k.inputs.clone(),
            adversarial: Alphabet::indexed(1),
            outputs: k.outputs.clone(),
            rows: vec![k.rows.iter().map(|r| vec![r.clone()]).collect()],
        }
    }

    /// The adversary picks the output among the neighbors of the input;
    /// non-neighbors fall back to the first neighbor.
    pub fn from_graph(g: &BipartiteGraph) -> Self {
        AvcfKernel {
            inputs: g.inputs.clone(),
            causal: Alphabet::indexed(1),
            adversarial: g.outputs.clone(),
            outputs: g.outputs.clone(),
            rows: (0..g.inputs.len()).map(|x| vec![graph_rows(g, x)]).collect(),
        }
    }

    pub fn from_graph_feedback(g: &BipartiteGraph) -> Self {
        AvcfKernel {
            inputs: Alphabet::indexed(1),
            causal: g.inputs.clone(),
            adversarial: g.outputs.clone(),
            outputs: g.outputs.clone(),
            rows: vec![(0..g.inputs.len()).map(|x| graph_rows(g, x)).collect()],
        }
    }
}

fn graph_rows(g: &BipartiteGraph, x: usize) -> Vec<Vec<f64>> {
    let d = g.outputs.len();
    (0..d)
        .map(|v| {
            let y = if g.has_edge(x, v) { v } else { g.neighbors[x][0] };
            let mut r = vec![0.0; d];
            r[y] = 1.0;
            r
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ChannelSpec {
    Dmc(DmcKernel),
    DmcFeedback(DmcKernel),
    Adversarial(BipartiteGraph),
    AdversarialFeedback(BipartiteGraph),
    Avcf(AvcfKernel),
    Bsc { beta: f64 },
    Erasure { p: f64 },
}

impl ChannelSpec {
    /// The kernel view shared by the game engine.
    pub fn kernel(&self) -> Result<AvcfKernel> {
        Ok(match self {
            ChannelSpec::Dmc(k) => {
                k.validate()?;
                AvcfKernel::from_dmc(k)
            }
            ChannelSpec::DmcFeedback(k) => {
                k.validate()?;
                AvcfKernel::from_dmc_feedback(k)
            }
            ChannelSpec::Adversarial(g) => {
                g.validate()?;
                AvcfKernel::from_graph(g)
            }
            ChannelSpec::AdversarialFeedback(g) => {
                g.validate()?;
                AvcfKernel::from_graph_feedback(g)
            }
            ChannelSpec::Avcf(k) => {
                k.validate()?;
                k.clone()
            }
            ChannelSpec::Bsc { beta } => AvcfKernel::from_dmc(&DmcKernel::bsc(*beta)?),
            ChannelSpec::Erasure { p } => AvcfKernel::from_dmc(&erasure_kernel(*p)?),
        })
    }
}

/// One mail, delivered with probability `1 - p`.
pub fn erasure_kernel(p: f64) -> Result<DmcKernel> {
    if !(p > 0.0 && p < 1.0) {
        return input("loss probability must lie in (0, 1)");
    }
    DmcKernel::new(
        Alphabet::new(["mail"])?,
        Alphabet::new(["delivered", "lost"])?,
        vec![vec![1.0 - p, p]],
    )
}

/// Cone of the insurance policy that charges 1 and refunds `1/p` on loss:
/// every portfolio dominated by a multiple of `(-1, 1/p - 1)`.
pub fn erasure_generator_cone(p: f64) -> Result<DcCone> {
    if !(p > 0.0 && p < 1.0) {
        return input("loss probability must lie in (0, 1)");
    }
    DcCone::from_generators(Alphabet::new(["delivered", "lost"])?, &[vec![-1.0, 1.0 / p - 1.0]])
}

/// `W(x) = union over z of the cell with normals p(.|x, z, v), v ranging`.
pub fn avcf_channel(k: &AvcfKernel) -> Result<GameChannel> {
    k.validate()?;
    let cones = k
        .rows
        .iter()
        .map(|by_z| DcCone::from_cells(k.outputs.clone(), by_z.clone()))
        .collect::<Result<Vec<_>>>()?;
    GameChannel::new(k.inputs.clone(), cones)
}

pub fn build_channel(spec: &ChannelSpec) -> Result<GameChannel> {
    match spec {
        ChannelSpec::Dmc(k) => {
            k.validate()?;
            let cones = k
                .rows
                .iter()
                .map(|r| DcCone::halfspace(k.outputs.clone(), r))
                .collect::<Result<Vec<_>>>()?;
            GameChannel::new(k.inputs.clone(), cones)
        }
        ChannelSpec::DmcFeedback(k) => {
            k.validate()?;
            let cone = DcCone::from_cells(k.outputs.clone(), k.rows.iter().map(|r| vec![r.clone()]).collect())?;
            GameChannel::new(Alphabet::indexed(1), vec![cone])
        }
        ChannelSpec::Adversarial(g) => {
            g.validate()?;
            let cones = g
                .neighbors
                .iter()
                .map(|n| DcCone::adversarial_cell(g.outputs.clone(), n))
                .collect::<Result<Vec<_>>>()?;
            GameChannel::new(g.inputs.clone(), cones)
        }
        ChannelSpec::AdversarialFeedback(g) => {
            g.validate()?;
            let per_input = build_channel(&ChannelSpec::Adversarial(g.clone()))?;
            GameChannel::new(Alphabet::indexed(1), vec![per_input.range_cone()])
        }
        ChannelSpec::Avcf(k) => avcf_channel(k),
        ChannelSpec::Bsc { beta } => build_channel(&ChannelSpec::Dmc(DmcKernel::bsc(*beta)?)),
        ChannelSpec::Erasure { p } => build_channel(&ChannelSpec::Dmc(erasure_kernel(*p)?)),
    }
}

/// Union over messages `m` of the cone generated by `m' -> 1{m' != m} - eps`.
pub fn requirement_cone(messages: usize, eps: f64) -> Result<DcCone> {
    if messages == 0 {
        return input("message count must be at least 1");
    }
    if !(eps > 0.0 && eps < 1.0) {
        return input("loss must lie in (0, 1)");
    }
    let gens: Vec<Vec<f64>> = (0..messages)
        .map(|m| (0..messages).map(|o| if o == m { -eps } else { 1.0 - eps }).collect())
        .collect();
    DcCone::from_generators(Alphabet::indexed(messages), &gens)
}

pub fn dual_channel(t: &GameChannel) -> Result<GameChannel> {
    let cones = t.cones.iter().map(DcCone::dual).collect::<Result<Vec<_>>>()?;
    GameChannel::new(t.inputs.clone(), cones)
}

/// Union over the output sets `S` that meet every input's neighbors of the
/// cell forcing nonpositive payoff on `S`.
pub fn covering_set_cone(g: &BipartiteGraph) -> Result<DcCone> {
    let d = g.outputs.len();
    if d > 20 {
        return Err(Error::Resource("covering-set enumeration limited to 20 outputs".into()));
    }
    let mut cells = Vec::new();
    for mask in 1u32..(1 << d) {
        let covers = g.neighbors.iter().all(|n| n.iter().any(|&y| mask & (1 << y) != 0));
        if covers {
            let cell: Vec<Vec<f64>> = (0..d)
                .filter(|&y| mask & (1 << y) != 0)
                .map(|y| {
                    let mut e = vec![0.0; d];
                    e[y] = 1.0;
                    e
                })
                .collect();
            cells.push(cell);
        }
    }
    Ok(DcCone::from_cells(g.outputs.clone(), cells)?.absorbed())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NUseMode {
    Fixed(Vec<usize>),
    AllInputs,
}

/// `W(x_1) ⋉ ... ⋉ W(x_n)`, or its union over every input sequence.
pub fn n_use_cone(w: &GameChannel, n: usize, mode: &NUseMode) -> Result<DcCone> {
    if n == 0 {
        return input("blocklength must be at least 1");
    }
    match checked_pow(w.outputs.len(), n) {
        Some(c) if c <= NUSE_CAP => {}
        _ => return Err(Error::Resource(format!("|Y|^n exceeds {NUSE_CAP}"))),
    }
    if w.cones.iter().any(|c| !c.all_single_normal()) {
        return Err(Error::Unsupported(
            "n-use cone needs single-normal cells; verify the game directly instead".into(),
        ));
    }
    let chain = |xs: &[usize]| -> Result<DcCone> {
        let cones: Vec<DcCone> = xs.iter().map(|&x| w.cones[x].clone()).collect();
        semidirect_explicit(&cones)
    };
    match mode {
        NUseMode::Fixed(xs) => {
            if xs.len() != n || xs.iter().any(|&x| x >= w.inputs.len()) {
                return input("input sequence must have length n and valid symbols");
            }
            chain(xs)
        }
        NUseMode::AllInputs => {
            let count = checked_pow(w.inputs.len(), n)
                .filter(|&c| c <= NUSE_CAP)
                .ok_or_else(|| Error::Resource(format!("|X|^n exceeds {NUSE_CAP}")))?;
            let mut cells = Vec::new();
            let mut alphabet = None;
            for i in 0..count {
                let c = chain(&sequence_digits(i, w.inputs.len(), n))?;
                alphabet.get_or_insert_with(|| c.alphabet().clone());
                cells.extend(c.cells().iter().cloned());
            }
            Ok(DcCone::from_parts(alphabet.expect("at least one input sequence"), cells))
        }
    }
}
