//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::time::{Duration, Instant};

use dcgame::capacity::{info_capacity, requirement_value, CapacityMethod};
use dcgame::channels::{
    build_channel, covering_set_cone, dual_channel, requirement_cone, BipartiteGraph, ChannelSpec, DmcKernel,
};
use dcgame::cone::{equals_cone, semidirect_explicit, Alphabet};
use dcgame::games::{
    check_zero_error_code, coding_feasible_by_degradedness, consistency_decoder, mail_constant_loss,
    repetition_code, synthesize_strategy, verify_game, verify_mail, worst_case_error, CodingScheme, GameSpec,
    SchemeModel, SynthesisKind, NODE_CAP,
};
use dcgame::info::{binary_entropy, entropy as shannon_entropy};
use dcgame::sampling::{random_cone, random_distribution, random_state_family};
use dcgame::source::{entropy, sanov_scheme, verify_source_game, EntropyInput, EntropyMethod, SourceGameSpec};
use dcgame::DcCone;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;
/// Convergence target handed to the capacity solvers.
const SOLVER_ACCURACY: f64 = 1e-4;

type Check = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Check, Duration);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: dcgame::Error) -> String {
    e.to_string()
}

fn capacity(cone: &DcCone, method: CapacityMethod) -> Result<f64, String> {
    info_capacity(cone, method, SOLVER_ACCURACY).map(|r| r.value).map_err(err)
}

fn dual_algebra() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..100 {
        let d = rng.gen_range(2..=4);
        let a = random_cone(&mut rng, d, 3, 3).map_err(err)?;
        let b = random_cone(&mut rng, d, 3, 3).map_err(err)?;
        let aa = a.dual().and_then(|x| x.dual()).map_err(err)?;
        ensure(equals_cone(&aa, &a, TOL).map_err(err)?, format!("cone {i}: double dual differs"))?;
        let lhs = a.union(&b).and_then(|u| u.dual()).map_err(err)?;
        let rhs = a.dual().and_then(|x| x.intersection(&b.dual()?)).map_err(err)?;
        ensure(equals_cone(&lhs, &rhs, TOL).map_err(err)?, format!("pair {i}: dual of union differs"))?;
    }
    Ok("100 random cones".into())
}

fn primitive_duals() -> Check {
    let bin = Alphabet::indexed(2);
    let h = DcCone::halfspace(bin.clone(), &[0.6, 0.4]).map_err(err)?;
    ensure(equals_cone(&h.dual().map_err(err)?, &h, TOL).map_err(err)?, "halfspace not self-dual")?;
    let empty = DcCone::empty(bin.clone());
    ensure(equals_cone(&empty.dual().map_err(err)?, &DcCone::full(bin.clone()), TOL).map_err(err)?, "dual(empty)")?;
    let np = DcCone::nonpositive(bin.clone());
    ensure(equals_cone(&np.dual().map_err(err)?, &DcCone::noiseless(bin), TOL).map_err(err)?, "dual(nonpositive)")?;
    Ok("halfspace, empty, nonpositive".into())
}

fn shannon_recovery() -> Check {
    let mut out = Vec::new();
    for beta in [0.05, 0.11, 0.25] {
        let cone = build_channel(&ChannelSpec::Bsc { beta }).map_err(err)?.range_cone();
        let ba = capacity(&cone, CapacityMethod::BlahutArimoto)?;
        let mm = capacity(&cone, CapacityMethod::Minimax)?;
        let exact = 1.0 - binary_entropy(beta);
        ensure((ba - exact).abs() <= 1e-3, format!("beta {beta}: BA {ba} vs {exact}"))?;
        ensure((ba - mm).abs() <= 2e-3, format!("beta {beta}: BA {ba} vs minimax {mm}"))?;
        out.push(format!("{beta}: {ba:.5}"));
    }
    Ok(out.join(", "))
}

fn fano_cone() -> Check {
    let mut out = Vec::new();
    for (l, eps) in [(2, 0.05), (2, 0.5), (4, 0.1)] {
        let closed = (l as f64).log2() - binary_entropy(eps) - eps * ((l - 1) as f64).log2();
        ensure((requirement_value(l, eps).map_err(err)? - closed).abs() < 1e-12, "closed form helper")?;
        let v = capacity(&requirement_cone(l, eps).map_err(err)?, CapacityMethod::Auto)?;
        ensure((v - closed).abs() <= 2e-3, format!("L={l}, eps={eps}: {v} vs {closed}"))?;
        out.push(format!("({l},{eps}): {v:.5}/{closed:.5}"));
    }
    Ok(out.join(", "))
}

fn martingale_round_trip() -> Check {
    let model = SchemeModel::Dmc(DmcKernel::bsc(0.2).map_err(err)?);
    let scheme = repetition_code(3).map_err(err)?;
    let (eps, table) = worst_case_error(&scheme, &model).map_err(err)?;
    // Brute force over the 8 noise patterns.
    let mut oracle: f64 = 0.0;
    for m in 0..2 {
        let mut e = 0.0;
        for y in 0..8usize {
            let flips = (0..3).filter(|&i| ((y >> (2 - i)) & 1) != m).count() as i32;
            if scheme.decoder[y] != m {
                e += 0.2f64.powi(flips) * 0.8f64.powi(3 - flips);
            }
        }
        oracle = oracle.max(e);
    }
    ensure((oracle - 0.104).abs() < 1e-12 && (eps - oracle).abs() < 1e-12, format!("worst-case error {eps}"))?;
    let s = synthesize_strategy(SynthesisKind::Martingale, &scheme, &model, TOL).map_err(err)?;
    let w = model.channel().map_err(err)?;
    let win = verify_game(&GameSpec::new(w.clone(), 3, 2, 0.104 + 1e-6).map_err(err)?, &s, TOL, NODE_CAP).map_err(err)?;
    let lose = verify_game(&GameSpec::new(w, 3, 2, 0.10).map_err(err)?, &s, TOL, NODE_CAP).map_err(err)?;
    ensure(win.is_win() && !lose.is_win(), "verdicts")?;
    for m in 0..2 {
        for y in 0..8usize {
            let ys = dcgame::cone::sequence_digits(y, 2, 3);
            let total: f64 = (0..3).map(|i| s.policy[m].get(&ys[..i])[ys[i]]).sum();
            let identity = table.get(m, &ys) - table.initial(m);
            ensure((total - identity).abs() <= 1e-12, format!("path identity at m={m}, y={ys:?}"))?;
        }
    }
    Ok("eps 0.104, win/lose, 8 paths per message".into())
}

fn zero_error_pentagon() -> Check {
    let g = BipartiteGraph::pentagon();
    let codewords: Vec<Vec<usize>> = (0..5).map(|i| vec![i, (2 * i) % 5]).collect();
    let decoder = consistency_decoder(&codewords, &g, 2).map_err(err)?;
    ensure(check_zero_error_code(&codewords, &decoder, &g, 2, 5).map_err(err)?, "code is not zero-error")?;
    let scheme = CodingScheme { n: 2, codewords, causal: None, decoder };
    let model = SchemeModel::ZeroError(g);
    let s = synthesize_strategy(SynthesisKind::ZeroError, &scheme, &model, TOL).map_err(err)?;
    for eps in [0.01, 0.5, 0.99] {
        let spec = GameSpec::new(model.channel().map_err(err)?, 2, 5, eps).map_err(err)?;
        let r = verify_game(&spec, &s, TOL, NODE_CAP).map_err(err)?;
        ensure(r.is_win(), format!("loses at eps {eps}"))?;
        ensure(r.paths == 5 * 25, format!("{} paths", r.paths))?;
    }
    Ok("25 plays per message at eps 0.01, 0.5, 0.99".into())
}

fn binomial_below(n: u32, k: u32, q: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..k {
        let mut c = 1.0;
        for i in 0..j {
            c = c * f64::from(n - i) / f64::from(i + 1);
        }
        total += c * q.powi(j as i32) * (1.0 - q).powi((n - j) as i32);
    }
    total
}

fn mail_insurance() -> Check {
    let mut out = Vec::new();
    for p in [0.1, 0.3] {
        let v = verify_mail(10, 7, p, TOL).map_err(err)?;
        let exact = binomial_below(10, 7, 1.0 - p);
        for r in [&v.halfspace, &v.generator] {
            ensure(r.is_win() && r.paths == 1024, format!("p={p}: verdict or path count"))?;
            ensure(
                (r.min_payoff + exact).abs() <= 1e-12 && (r.max_payoff + exact).abs() <= 1e-12,
                format!("p={p}: losses in [{}, {}] vs {exact}", -r.max_payoff, -r.min_payoff),
            )?;
        }
        out.push(format!("p={p}: {exact:.7}"));
    }
    let sweep = mail_constant_loss(200, 100, 0.3).map_err(err)?;
    ensure(sweep < 0.01, format!("n=200 R=0.5 loss {sweep}"))?;
    out.push(format!("n=200 R=0.5: {sweep:.2e}"));
    Ok(out.join(", "))
}

fn single_normal_cone(rng: &mut ChaCha8Rng, d: usize) -> Result<DcCone, String> {
    let cells = (0..rng.gen_range(1..=3)).map(|_| vec![random_distribution(rng, d)]).collect();
    DcCone::from_cells(Alphabet::indexed(d), cells).map_err(err)
}

fn additivity_monotonicity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_add: f64 = 0.0;
    for i in 0..30 {
        let (dy, dz) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
        let a = single_normal_cone(&mut rng, dy)?;
        let b = single_normal_cone(&mut rng, dz)?;
        let ab = semidirect_explicit(&[a.clone(), b.clone()]).map_err(err)?;
        let gap = (capacity(&ab, CapacityMethod::Auto)?
            - capacity(&a, CapacityMethod::Auto)?
            - capacity(&b, CapacityMethod::Auto)?)
        .abs();
        ensure(gap <= 2e-3, format!("pair {i}: additivity gap {gap}"))?;
        worst_add = worst_add.max(gap);
    }
    let mut worst_mono: f64 = 0.0;
    for i in 0..30 {
        let d = rng.gen_range(2..=3);
        let a = random_cone(&mut rng, d, 2, 2).map_err(err)?;
        let c = random_cone(&mut rng, d, 2, 2).map_err(err)?;
        let (small, big) = if i % 2 == 0 {
            (a.clone(), a.union(&c).map_err(err)?)
        } else {
            (a.intersection(&c).map_err(err)?, a)
        };
        let drop = capacity(&small, CapacityMethod::Auto)? - capacity(&big, CapacityMethod::Auto)?;
        ensure(drop <= 2e-3, format!("pair {i}: I(smaller) exceeds I(larger) by {drop}"))?;
        worst_mono = worst_mono.max(drop);
    }
    Ok(format!("max additivity gap {worst_add:.1e}, max monotonicity excess {worst_mono:.1e}"))
}

fn zero_law() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut informative = 0;
    for i in 0..50 {
        let d = rng.gen_range(2..=3);
        let a = random_cone(&mut rng, d, 3, 3).map_err(err)?;
        let inf = a.is_informative(TOL).map_err(err)?;
        let mut r = info_capacity(&a, CapacityMethod::Auto, SOLVER_ACCURACY).map_err(err)?;
        if inf != (r.value > 1e-4) {
            // Tighter solve so the report shows whether the capacity is really positive.
            r = info_capacity(&a, CapacityMethod::Auto, 1e-7).map_err(err)?;
        }
        ensure(
            inf == (r.value > 1e-4),
            format!(
                "cone {i}: informative={inf}, capacity {:.3e} with certified bracket [{:.3e}, {:.3e}]",
                r.value, r.lower_bound, r.upper_bound
            ),
        )?;
        informative += usize::from(inf);
    }
    Ok(format!("{informative} informative, {} not", 50 - informative))
}

fn avcf_duality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..20 {
        let d = rng.gen_range(2..=4);
        let states = rng.gen_range(1..=4);
        let family = random_state_family(&mut rng, d, states);
        let union = DcCone::from_cells(Alphabet::indexed(d), family.iter().map(|p| vec![p.clone()]).collect()).map_err(err)?;
        let inter = DcCone::from_cells(Alphabet::indexed(d), vec![family]).map_err(err)?;
        ensure(equals_cone(&union.dual().map_err(err)?, &inter, TOL).map_err(err)?, format!("family {i}"))?;
    }
    let g = BipartiteGraph::pentagon();
    let fb = build_channel(&ChannelSpec::AdversarialFeedback(g.clone())).map_err(err)?;
    let dual = dual_channel(&fb).map_err(err)?;
    ensure(equals_cone(dual.cone(0), &covering_set_cone(&g).map_err(err)?, TOL).map_err(err)?, "pentagon dual")?;
    Ok("20 families, pentagon covering sets".into())
}

fn source_coding() -> Check {
    let half = DcCone::halfspace(Alphabet::indexed(2), &[0.5, 0.5]).map_err(err)?;
    let h = entropy(EntropyInput::Cone(&half), EntropyMethod::HalfspaceClosedForm, TOL, 0).map_err(err)?.value;
    ensure((h - 1.0).abs() <= 1e-6, format!("entropy of uniform halfspace {h}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..50 {
        let d = rng.gen_range(2..=3);
        let p = random_distribution(&mut rng, d);
        let exact = shannon_entropy(&p);
        let cone = DcCone::halfspace(Alphabet::indexed(d), &p).map_err(err)?;
        let closed = entropy(EntropyInput::Cone(&cone), EntropyMethod::HalfspaceClosedForm, TOL, 0).map_err(err)?.value;
        let generator: Vec<f64> = p.iter().map(|v| -v.log2() - exact).collect();
        let gen = entropy(EntropyInput::Generators(&[generator]), EntropyMethod::GeneratorForm, TOL, 0)
            .map_err(err)?
            .value;
        let search = entropy(EntropyInput::Cone(&cone), EntropyMethod::SearchUpperBound, TOL, i).map_err(err)?.value;
        for (name, v) in [("closed form", closed), ("generator form", gen), ("search", search)] {
            ensure((v - exact).abs() <= 1e-6, format!("p={p:?}: {name} {v} vs {exact}"))?;
        }
    }
    let a = [1.0, -1.0];
    let s = sanov_scheme(&a, 4.0, 0.2, 4, NODE_CAP).map_err(err)?;
    ensure(s.set.len() == 11, format!("|S| = {}", s.set.len()))?;
    let cone = DcCone::from_generators(Alphabet::indexed(2), &[a.to_vec()]).map_err(err)?;
    let spec = SourceGameSpec { cone, n: 4, messages: 11, eps: 0.2, policy: s.policy.clone(), code: s.code.clone() };
    let r = verify_source_game(&spec, TOL, NODE_CAP).map_err(err)?;
    ensure(
        r.is_win(),
        format!("entropies ok, |S| = 11, but the n=4 scheme loses at L=11, eps=0.2 (min payoff {})", r.min_payoff),
    )?;
    Ok("entropies within 1e-6, |S| = 11, n=4 scheme wins".into())
}

fn degradedness_consistency() -> Check {
    let model = SchemeModel::Dmc(DmcKernel::bsc(0.2).map_err(err)?);
    let w = model.channel().map_err(err)?;
    let mut out = Vec::new();
    for (n, l, eps) in [(1usize, 2usize, 0.1), (3, 2, 0.104)] {
        let scheme = repetition_code(n).map_err(err)?;
        let s = synthesize_strategy(SynthesisKind::Martingale, &scheme, &model, TOL).map_err(err)?;
        let verdict = verify_game(&GameSpec::new(w.clone(), n, l, eps).map_err(err)?, &s, TOL, NODE_CAP)
            .map_err(err)?
            .is_win();
        let feasible = coding_feasible_by_degradedness(&w, n, l, eps, TOL).map_err(err)?.is_some();
        ensure(verdict == feasible, format!("({n},{l},{eps}): game {verdict}, degradedness {feasible}"))?;
        out.push(format!("({n},{l},{eps}): {feasible}"));
    }
    Ok(out.join(", "))
}

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "dual algebra", dual_algebra, Duration::from_secs(30)),
        (2, "self-duality and primitive duals", primitive_duals, Duration::from_secs(1)),
        (3, "Shannon capacity recovery", shannon_recovery, Duration::from_secs(30)),
        (4, "loss-requirement cone capacity", fano_cone, Duration::from_secs(30)),
        (5, "martingale round trip", martingale_round_trip, Duration::from_secs(5)),
        (6, "zero-error pentagon", zero_error_pentagon, Duration::from_secs(5)),
        (7, "mail insurance", mail_insurance, Duration::from_secs(30)),
        (8, "additivity and monotonicity of capacity", additivity_monotonicity, Duration::from_secs(120)),
        (9, "informativeness zero law", zero_law, Duration::from_secs(60)),
        (10, "AVCF duality", avcf_duality, Duration::from_secs(10)),
        (11, "source coding", source_coding, Duration::from_secs(30)),
        (12, "degradedness consistency", degradedness_consistency, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (id, name, check, budget) in criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let line = match result {
            Ok(detail) if took <= budget => format!("PASS [{id}] {name}: {detail} ({:.2} s)", took.as_secs_f64()),
            Ok(detail) => format!("FAIL [{id}] {name}: {detail}, but took {:.2} s > {:?}", took.as_secs_f64(), budget),
            Err(why) => format!("FAIL [{id}] {name}: {why} ({:.2} s)", took.as_secs_f64()),
        };
        if line.starts_with("FAIL") {
            failed += 1;
        }
        println!("{line}");
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
