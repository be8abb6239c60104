use dcgame::capacity::{info_capacity, requirement_value, CapacityMethod};
use dcgame::channels::{build_channel, covering_set_cone, dual_channel, requirement_cone, BipartiteGraph, ChannelSpec};
use dcgame::cone::{equals_cone, Alphabet};
use dcgame::games::{
    check_zero_error_code, consistency_decoder, synthesize_strategy, verify_game, verify_mail, CodingScheme, GameSpec,
    SchemeModel, SynthesisKind,
};
use dcgame::info::binary_entropy;
use dcgame::sampling::random_state_family;
use dcgame::{DcCone, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::commands::{verify_json, CAPACITY_ACCURACY};
use crate::report::{num, Outcome};
use crate::{Ctx, DemoCmd};

/// Agreement required between a solver and its closed form.
const CAPACITY_AGREEMENT: f64 = 2e-3;

pub fn run(ctx: &mut Ctx, cmd: DemoCmd) -> Result<Outcome> {
    match cmd {
        DemoCmd::Mail { n, k, p } => {
            let v = verify_mail(n, k, p, ctx.tol)?;
            let win = v.halfspace.is_win() && v.generator.is_win();
            Ok(Outcome::new(win)
                .with("constant_loss", num(v.constant_loss))
                .with("verified_paths", v.halfspace.paths)
                .with("win", win)
                .with("min_payoff", num(v.halfspace.min_payoff))
                .with("max_payoff", num(v.halfspace.max_payoff))
                .with("generator_cone_win", v.generator.is_win())
                .with("rate", k as f64 / n as f64)
                .with("rate_below_capacity", (k as f64 / n as f64) < 1.0 - p))
        }
        DemoCmd::BscFeedback { beta } => {
            let w = build_channel(&ChannelSpec::Bsc { beta })?;
            let range = w.range_cone();
            let r = info_capacity(&range, CapacityMethod::Auto, CAPACITY_ACCURACY)?;
            let closed = 1.0 - binary_entropy(beta);
            let informative = range.is_informative(ctx.tol)?;
            let agree = (r.value - closed).abs() <= 1e-3;
            Ok(Outcome::new(agree)
                .with("capacity", num(r.value))
                .with("lower_bound", num(r.lower_bound))
                .with("upper_bound", num(r.upper_bound))
                .with("closed_form", num(closed))
                .with("informative", informative))
        }
        DemoCmd::Pentagon => {
            let g = BipartiteGraph::pentagon();
            let codewords: Vec<Vec<usize>> = (0..5).map(|i| vec![i, (2 * i) % 5]).collect();
            let decoder = consistency_decoder(&codewords, &g, 2)?;
            let zero_error = check_zero_error_code(&codewords, &decoder, &g, 2, 5)?;
            let scheme = CodingScheme { n: 2, codewords, causal: None, decoder };
            let model = SchemeModel::ZeroError(g.clone());
            let s = synthesize_strategy(SynthesisKind::ZeroError, &scheme, &model, ctx.tol)?;
            let mut ok = zero_error;
            let mut runs = Vec::new();
            for eps in [0.01, 0.5, 0.99] {
                let spec = GameSpec::new(model.channel()?, 2, 5, eps)?;
                let r = verify_game(&spec, &s, ctx.tol, ctx.node_cap)?;
                ok &= r.is_win();
                runs.push(json!({"eps": eps, "report": verify_json(&r)}));
            }
            let fb = build_channel(&ChannelSpec::AdversarialFeedback(g.clone()))?;
            let dual_is_covering = equals_cone(dual_channel(&fb)?.cone(0), &covering_set_cone(&g)?, ctx.tol)?;
            ok &= dual_is_covering;
            Ok(Outcome::new(ok)
                .with("zero_error_code", zero_error)
                .with("games", runs)
                .with("feedback_dual_is_covering_cone", dual_is_covering))
        }
        DemoCmd::Fano { messages, eps } => {
            let closed = requirement_value(messages, eps)?;
            let r = info_capacity(&requirement_cone(messages, eps)?, CapacityMethod::Auto, CAPACITY_ACCURACY)?;
            let agree = (r.value - closed).abs() <= CAPACITY_AGREEMENT;
            Ok(Outcome::new(agree)
                .with("closed_form", num(closed))
                .with("solver", num(r.value))
                .with("lower_bound", num(r.lower_bound))
                .with("upper_bound", num(r.upper_bound))
                .with("within", CAPACITY_AGREEMENT))
        }
        DemoCmd::AvcfDual { families, outputs, states } => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let alphabet = Alphabet::indexed(outputs);
            let mut agree = 0;
            for _ in 0..families {
                let family = random_state_family(&mut rng, outputs, states);
                let union = DcCone::from_cells(alphabet.clone(), family.iter().map(|p| vec![p.clone()]).collect())?;
                let inter = DcCone::from_cells(alphabet.clone(), vec![family.clone()])?;
                if equals_cone(&union.dual()?, &inter, ctx.tol)? {
                    agree += 1;
                }
            }
            Ok(Outcome::new(agree == families).with("families", families).with("agreeing", agree))
        }
    }
}
