use std::path::Path;

use dcgame::capacity::{info_capacity, validate_hull_reduction, CapacityMethod};
use dcgame::channels::{build_channel, ChannelSpec, GameChannel};
use dcgame::cone::{contains_cone, semidirect_explicit, Alphabet};
use dcgame::games::{
    coding_feasible_by_degradedness, synthesize_strategy, verify_game, worst_case_error, CodingScheme, GameSpec,
    PrefixTable, SchemeModel, SynthesisKind, TeamStrategy, VerifyReport,
};
use dcgame::source::{
    best_lossless_code, entropy, sanov_scheme, synthesize_source_strategy, verify_source_game, EntropyInput,
    EntropyMethod, SourceCode, SourceGameSpec,
};
use dcgame::{DcCone, Error, Result};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::report::{num, nums, Outcome};
use crate::{ChannelCmd, ConeCmd, ConeOp, Ctx, GameCmd, SourceCmd};

/// Convergence target for capacity solves.
pub const CAPACITY_ACCURACY: f64 = 1e-4;

fn parse<T: for<'de> Deserialize<'de>>(value: Value, what: &str) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::Input(format!("bad {what}: {e}")))
}

fn read_cone(ctx: &mut Ctx, path: &Path) -> Result<DcCone> {
    DcCone::from_json(&ctx.read_json(path)?)
}

fn read_channel(ctx: &mut Ctx, path: &Path) -> Result<GameChannel> {
    GameChannel::from_json(&ctx.read_json(path)?)
}

pub fn verify_json(r: &VerifyReport) -> Value {
    json!({
        "verdict": r.verdict,
        "win": r.is_win(),
        "min_payoff": num(r.min_payoff),
        "max_payoff": num(r.max_payoff),
        "worst_path": r.worst_path,
        "violations": r.violations,
        "violation_count": r.violation_count,
        "nodes": r.nodes,
        "paths": r.paths,
    })
}

pub fn cone(ctx: &mut Ctx, cmd: ConeCmd) -> Result<Outcome> {
    match cmd {
        ConeCmd::Op { op, first, second, lambda, eps, map } => {
            let a = read_cone(ctx, &first)?;
            let mut b = || -> Result<DcCone> {
                let path = second.as_deref().ok_or_else(|| Error::Input(format!("{op:?} needs a second cone")))?;
                read_cone(ctx, path)
            };
            let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| Error::Input(format!("{op:?} needs --{flag}")));
            let out = match op {
                ConeOp::Union => a.union(&b()?)?,
                ConeOp::Intersection => a.intersection(&b()?)?,
                ConeOp::DisjointSum => a.disjoint_sum(&b()?),
                ConeOp::Minplus => a.minplus(&b()?, need(lambda, "lambda")?)?,
                ConeOp::Robustify => a.robustify(need(eps, "eps")?)?,
                ConeOp::Semidirect => semidirect_explicit(&[a, b()?])?,
                ConeOp::Pushforward => {
                    if map.len() != a.dim() {
                        return Err(Error::Input("--map needs one target label per symbol".into()));
                    }
                    let mut labels: Vec<String> = Vec::new();
                    for l in &map {
                        if !labels.contains(l) {
                            labels.push(l.clone());
                        }
                    }
                    let target = Alphabet::new(labels.iter())?;
                    let f = map.iter().map(|l| target.require_index(l)).collect::<Result<Vec<_>>>()?;
                    a.pushforward(&target, &f)?
                }
            };
            Ok(Outcome::new(true).with("cone", out.absorbed().canonical().to_json()))
        }
        ConeCmd::Dual { cone } => {
            let a = read_cone(ctx, &cone)?;
            Ok(Outcome::new(true).with("cone", a.dual()?.absorbed().canonical().to_json()))
        }
        ConeCmd::Contains { outer, inner } => {
            let a = read_cone(ctx, &outer)?;
            let b = read_cone(ctx, &inner)?;
            let c = contains_cone(&a, &b, ctx.tol)?;
            Ok(Outcome::new(c.contained)
                .with("contained", c.contained)
                .with("boundary", c.boundary)
                .with("witness", c.witness.map_or(Value::Null, |w| nums(&w))))
        }
        ConeCmd::Member { cone, portfolio } => {
            let a = read_cone(ctx, &cone)?;
            let member = a.contains_portfolio(&portfolio, ctx.tol)?;
            Ok(Outcome::new(member).with("member", member))
        }
        ConeCmd::Informative { cone } => {
            let a = read_cone(ctx, &cone)?;
            let informative = a.is_informative(ctx.tol)?;
            let witness = if informative || a.is_empty_cone() { None } else { a.noninformative_witness(ctx.tol)? };
            Ok(Outcome::new(informative)
                .with("informative", informative)
                .with("pricing_distribution", witness.map_or(Value::Null, |w| nums(&w))))
        }
    }
}

pub fn capacity(ctx: &mut Ctx, path: &Path, method: &str, samples: usize) -> Result<Outcome> {
    let a = read_cone(ctx, path)?;
    let method: CapacityMethod = method.parse()?;
    let r = info_capacity(&a, method, CAPACITY_ACCURACY)?;
    let mut out = Outcome::new(true)
        .with("capacity", num(r.value))
        .with("lower_bound", num(r.lower_bound))
        .with("upper_bound", num(r.upper_bound))
        .with("method", json!(r.method))
        .with("iterations", r.iterations)
        .with("prior", r.prior.as_deref().map_or(Value::Null, nums));
    if samples > 0 {
        if let Some(prior) = &r.prior {
            let v = validate_hull_reduction(&a, prior, samples, ctx.seed)?;
            out = out.with("hull_validation", json!(v));
        }
    }
    Ok(out)
}

pub fn entropy_of(
    ctx: &mut Ctx,
    cone: Option<&Path>,
    generators: Option<&Path>,
    method: Option<&str>,
) -> Result<Outcome> {
    let gens: Vec<Vec<f64>>;
    let a: DcCone;
    let (input, default) = match (cone, generators) {
        (_, Some(g)) => {
            gens = parse(ctx.read_json(g)?, "generator list")?;
            (EntropyInput::Generators(&gens), EntropyMethod::GeneratorForm)
        }
        (Some(c), None) => {
            a = read_cone(ctx, c)?;
            let single = matches!(a.cells(), [cell] if cell.normals().len() == 1);
            let m = if single { EntropyMethod::HalfspaceClosedForm } else { EntropyMethod::SearchUpperBound };
            (EntropyInput::Cone(&a), m)
        }
        (None, None) => return Err(Error::Input("give a cone file or --generators".into())),
    };
    let method = method.map(str::parse).transpose()?.unwrap_or(default);
    let v = entropy(input, method, ctx.tol, ctx.seed)?;
    Ok(Outcome::new(true).with("entropy", num(v.value)).with("certified", v.certified).with("method", json!(v.method)))
}

pub fn channel(ctx: &mut Ctx, cmd: ChannelCmd) -> Result<Outcome> {
    match cmd {
        ChannelCmd::Build { spec, out } => {
            let spec: ChannelSpec = parse(ctx.read_json(&spec)?, "channel description")?;
            let w = build_channel(&spec)?;
            let j = w.to_json();
            if let Some(path) = out {
                ctx.write_json(&path, &j)?;
            }
            Ok(Outcome::new(true).with("channel", j))
        }
    }
}

#[derive(Deserialize)]
struct SchemeFile {
    model: SchemeModel,
    scheme: CodingScheme,
}

pub fn game(ctx: &mut Ctx, cmd: GameCmd) -> Result<Outcome> {
    match cmd {
        GameCmd::Synth { scheme, kind, eps, strategy_out, channel_out } => {
            let file: SchemeFile = parse(ctx.read_json(&scheme)?, "scheme file")?;
            let kind: SynthesisKind = parse(json!(kind), "synthesis kind")?;
            let s = synthesize_strategy(kind, &file.scheme, &file.model, ctx.tol)?;
            let w = file.model.channel()?;
            let sj = s.to_json(&w);
            let wj = w.to_json();
            if let Some(p) = strategy_out {
                ctx.write_json(&p, &sj)?;
            }
            if let Some(p) = channel_out {
                ctx.write_json(&p, &wj)?;
            }
            let mut out = Outcome::new(true).with("strategy", sj).with("channel", wj);
            if kind == SynthesisKind::Martingale {
                out = out.with("worst_case_error", num(worst_case_error(&file.scheme, &file.model)?.0));
            }
            if let Some(eps) = eps {
                let spec = GameSpec::new(w, file.scheme.n, file.scheme.messages(), eps)?;
                let r = verify_game(&spec, &s, ctx.tol, ctx.node_cap)?;
                out.set_status(r.is_win());
                out = out.with("verification", verify_json(&r));
            }
            Ok(out)
        }
        GameCmd::Verify { channel, strategy, n, messages, eps, prefix_rule } => {
            let w = read_channel(ctx, &channel)?;
            let s = TeamStrategy::from_json(&ctx.read_json(&strategy)?, &w, n)?;
            let mut spec = GameSpec::new(w, n, messages, eps)?;
            spec.prefix_rule = prefix_rule;
            let r = verify_game(&spec, &s, ctx.tol, ctx.node_cap)?;
            Ok(Outcome::new(r.is_win()).with("verification", verify_json(&r)))
        }
        GameCmd::Feasible { channel, n, messages, eps } => {
            let w = read_channel(ctx, &channel)?;
            let f = coding_feasible_by_degradedness(&w, n, messages, eps, ctx.tol)?;
            let decoder = f.as_ref().map_or(Value::Null, |d| {
                let outs = w.outputs();
                let k = outs.len();
                let m: serde_json::Map<String, Value> = d
                    .iter()
                    .enumerate()
                    .map(|(i, &msg)| (outs.sequence_label(&dcgame::cone::sequence_digits(i, k, n)), json!(msg)))
                    .collect();
                Value::Object(m)
            });
            Ok(Outcome::new(f.is_some()).with("feasible", f.is_some()).with("decoder", decoder))
        }
    }
}

#[derive(Deserialize)]
struct SourceStrategyFile {
    code: SourceCode,
    policy: PrefixTable<Vec<f64>>,
}

pub fn source(ctx: &mut Ctx, cmd: SourceCmd) -> Result<Outcome> {
    match cmd {
        SourceCmd::Synth { p, n, messages, strategy_out } => {
            let code = best_lossless_code(&p, n, messages)?;
            let policy = synthesize_source_strategy(&p, &code, ctx.tol)?;
            let err = code.error_probability(&dcgame::cone::normalize(&p)?)?;
            let strategy = json!({"code": code, "policy": policy});
            if let Some(path) = strategy_out {
                ctx.write_json(&path, &strategy)?;
            }
            Ok(Outcome::new(true).with("error_probability", num(err)).with("strategy", strategy))
        }
        SourceCmd::Verify { cone, strategy, eps, messages } => {
            let a = read_cone(ctx, &cone)?;
            let file: SourceStrategyFile = parse(ctx.read_json(&strategy)?, "source strategy")?;
            let spec = SourceGameSpec {
                cone: a,
                n: file.code.n,
                messages: messages.unwrap_or(file.code.messages()),
                eps,
                policy: file.policy,
                code: file.code,
            };
            let r = verify_source_game(&spec, ctx.tol, ctx.node_cap)?;
            Ok(Outcome::new(r.is_win()).with("verification", verify_json(&r)))
        }
        SourceCmd::Sanov { a, gamma, eps, n, verify } => {
            let s = sanov_scheme(&a, gamma, eps, n, ctx.node_cap)?;
            let mut out = Outcome::new(s.bound.holds)
                .with("set_size", s.set.len())
                .with("bound", num(s.bound.bound))
                .with("exponent", num(s.bound.exponent))
                .with("bound_holds", s.bound.holds);
            if verify {
                let cone = DcCone::from_generators(Alphabet::indexed(a.len()), std::slice::from_ref(&a))?;
                let spec = SourceGameSpec {
                    cone,
                    n,
                    messages: s.code.messages(),
                    eps,
                    policy: s.policy.clone(),
                    code: s.code.clone(),
                };
                let r = verify_source_game(&spec, ctx.tol, ctx.node_cap)?;
                out.set_status(r.is_win());
                out = out.with("verification", verify_json(&r));
            }
            Ok(out)
        }
    }
}
