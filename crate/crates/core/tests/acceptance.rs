//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p smoothcal --test acceptance`; `ACCEPTANCE_ONLY=1,7`
//! restricts the run to the listed criteria.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smoothcal::dynamics::{
    eps_nash_check, run_continuous_dynamic, run_exhaustive_search, run_smooth_calibrated_learning,
    tune_dynamic_parameters, ContinuousConfig, ContinuousGame, DynamicConfig, FiniteGame,
};
use smoothcal::forecaster::{ActionSet, ForecasterSettings, SolverStats, WeakForecaster};
use smoothcal::game::{play, Adversary, AdversaryKind, Forecaster, ReactionMap};
use smoothcal::geometry::{maximal_net_default, BasisFamily, ConvexDomain, PartitionOfUnity, SmoothBestReply};
use smoothcal::regression::{
    block_expand, d2, default_maintenance, loss, theta_grid, tune_parameters, DataGenerator, DataKind, Observation,
    RegressorParams, Regressor, RegretTracker, Variant,
};
use smoothcal::scores::{
    averaging_bound, calibration_score, gamma, indicator_sup_bound, smoothed_score, smoothed_scores, weak_score,
    SmoothedVariant, SmoothingKernel, Transcript, WeightFunction,
};

type Outcome = (bool, String);

fn main() -> ExitCode {
    let only: Option<Vec<String>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').map(|s| s.trim().to_string()).collect());
    let mut solver = SolverStats::default();
    let mut failed = 0;
    let mut report = |name: &str, f: &mut dyn FnMut(&mut SolverStats) -> Outcome, solver: &mut SolverStats| {
        let id = name.split(' ').next().unwrap_or_default();
        if only.as_ref().is_some_and(|o| !o.iter().any(|x| x == id)) {
            return;
        }
        let start = Instant::now();
        let res = panic::catch_unwind(AssertUnwindSafe(|| f(solver)));
        let (ok, detail) = res.unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        if !ok {
            failed += 1;
        }
        println!(
            "{} {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    };
    report("1 regression regret", &mut |_| regression_regret(), &mut solver);
    report("2 block reduction", &mut |_| block_reduction(), &mut solver);
    report("3 windowed vs discounted", &mut |_| windowed_closeness(), &mut solver);
    report("4 geometry toolkit", &mut |_| geometry_toolkit(), &mut solver);
    let mut game_runs = Vec::new();
    report("5 weak calibration", &mut |s| weak_calibration(s, &mut game_runs), &mut solver);
    report("6 smooth vs regular", &mut |_| separation(&game_runs), &mut solver);
    report("7 score algebra", &mut |_| score_algebra(), &mut solver);
    report("9 nash dynamics", &mut nash_dynamics, &mut solver);
    report("10 continuous dynamic", &mut continuous, &mut solver);
    report("8 fixed-point solver", &mut |s| solver_quality(s, &game_runs), &mut solver);
    report("11 parameter schedules", &mut |_| schedules(), &mut solver);
    println!("{failed} criteria failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn run_regression(params: &RegressorParams, kind: DataKind, seed: u64, periods: usize, window: usize, eps: f64) -> (usize, usize, f64, f64) {
    let d = params.dim;
    let gen = DataGenerator::new(kind, d, seed);
    let mut reg = Regressor::with_maintenance(params.clone(), default_maintenance(params)).unwrap();
    let mut tracker = RegretTracker::new(d, window, theta_grid(d), eps).unwrap();
    for t in 1..=periods as u64 {
        let x = gen.features(t);
        let pred = reg.predict(&x).unwrap();
        let y = gen.target(t, &x, pred.y_hat);
        let obs = Observation::new(x, y);
        let l = loss(&pred.theta, &obs);
        reg.update(obs.clone()).unwrap();
        tracker.push(obs, l);
    }
    let r = tracker.report();
    (r.violations.0, r.violations.1, r.max_excess.0, r.max_excess.1)
}

fn regression_regret() -> Outcome {
    let start = Instant::now();
    let eps = 0.1;
    let mut details = Vec::new();
    let mut ok = true;
    for d in 1..=3 {
        let tuned = tune_parameters(eps, 1.0, 1.0, d);
        let recall = tuned.recall_usize().expect("recall fits in memory");
        let params =
            RegressorParams::new(Variant::Windowed { lambda: tuned.lambda, recall }, tuned.a, d).with_bounds(1.0, 1.0);
        for (kind, seed) in [(DataKind::Random, 11), (DataKind::Adversarial, 12)] {
            let (vw, vc, ew, ec) = run_regression(&params, kind, seed, 10 * recall, recall, eps);
            ok &= vw == 0 && vc == 0;
            details.push(format!("d={d} R={recall} {kind:?}: violations {vw}/{vc}, max excess {ew:.2e}/{ec:.2e}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 30.0;
    (ok, format!("{}; runtime {secs:.1}s (< 30s)", details.join("; ")))
}

fn block_reduction() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in 1..=2 {
        let (a, lambda) = (1.0, 0.9);
        let gen = DataGenerator::new(DataKind::Random, d, 3);
        let data: Vec<Observation> = (1..=30).map(|t| gen.observation(t, 0.0)).collect();
        let mut disc = Regressor::new(RegressorParams::new(Variant::Discounted { lambda }, a, d)).unwrap();
        let expanded = block_expand(&data, a, lambda).unwrap();
        let unbounded = RegressorParams::new(Variant::Forward, a, d).with_bounds(f64::INFINITY, f64::INFINITY);
        let mut fwd = Regressor::new(unbounded).unwrap();
        let mut fwd_thetas = Vec::new();
        for obs in &expanded {
            fwd_thetas.push(fwd.predict(&obs.x).unwrap().theta);
            fwd.update(obs.clone()).unwrap();
        }
        for (t, obs) in data.iter().enumerate() {
            let th = disc.predict(&obs.x).unwrap().theta;
            disc.update(obs.clone()).unwrap();
            let fth = &fwd_thetas[(t + 1) * (d + 1) - 1];
            for (p, q) in th.iter().zip(fth) {
                worst = worst.max((p - q).abs());
            }
        }
    }
    (worst <= 1e-9, format!("max |θ difference| = {worst:.2e} (≤ 1e-9) over T=30, d ∈ {{1,2}}"))
}

fn windowed_closeness() -> Outcome {
    let a = 1.0;
    let mut worst_ratio: f64 = 0.0;
    let mut violations = 0;
    let cases = [(1, 0.5, 10), (1, 0.75, 30), (2, 0.5, 12), (2, 0.8, 40), (3, 0.7, 30)];
    for &(d, lambda, recall) in &cases {
        let bound = d2(d, a, lambda) * f64::powi(lambda, recall as i32);
        for seed in 0..10 {
            let gen = DataGenerator::new(DataKind::Random, d, 100 + seed);
            let mut win = Regressor::new(RegressorParams::new(Variant::Windowed { lambda, recall }, a, d)).unwrap();
            let mut disc = Regressor::new(RegressorParams::new(Variant::Discounted { lambda }, a, d)).unwrap();
            for t in 1..=5000u64 {
                let obs = gen.observation(t, 0.0);
                let tw = win.predict(&obs.x).unwrap().theta;
                let td = disc.predict(&obs.x).unwrap().theta;
                let gap = (loss(&tw, &obs) - loss(&td, &obs)).abs();
                if gap > bound {
                    violations += 1;
                }
                worst_ratio = worst_ratio.max(gap / bound);
                win.update(obs.clone()).unwrap();
                disc.update(obs).unwrap();
            }
        }
    }
    (
        violations == 0,
        format!("{violations} violations of |ψ(θ̃)−ψ(θ)| ≤ D2·λ^R, worst gap/bound = {worst_ratio:.3e}; 5 (d,λ,R) cases × 10 seeds × 5000 steps"),
    )
}

fn sample(domain: &ConvexDomain, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match domain {
        ConvexDomain::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| rng.gen_range(*l..=*u)).collect(),
        ConvexDomain::Simplex { dim } => {
            let e: Vec<f64> = (0..*dim).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
            let s: f64 = e.iter().sum();
            e.iter().map(|v| v / s).collect()
        }
        ConvexDomain::Product { factors } => factors.iter().flat_map(|f| sample(f, rng)).collect(),
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn geometry_toolkit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let domains = [
        (ConvexDomain::unit_box(1), 0.05),
        (ConvexDomain::unit_box(2), 0.1),
        (ConvexDomain::simplex(3).unwrap(), 0.1),
        (ConvexDomain::product(vec![ConvexDomain::simplex(2).unwrap(), ConvexDomain::simplex(2).unwrap()]).unwrap(), 0.1),
    ];
    let (mut sum_err, mut support_bad, mut count_bad, mut lip_bad, mut neg) = (0.0f64, 0, 0, 0, 0);
    for (domain, eps) in &domains {
        let part = PartitionOfUnity::new(maximal_net_default(domain, *eps).unwrap());
        let m = domain.dim();
        let lip = part.lipschitz_bound();
        let cap = 4usize.pow(m as u32);
        for _ in 0..10_000 / domains.len() {
            let x = sample(domain, &mut rng);
            let y = sample(domain, &mut rng);
            let bx = part.eval(&x).unwrap();
            let by = part.eval(&y).unwrap();
            sum_err = sum_err.max((bx.iter().sum::<f64>() - 1.0).abs());
            neg += bx.iter().filter(|b| **b < 0.0).count();
            for (k, z) in part.net().centers.iter().enumerate() {
                if bx[k] > 0.0 && dist(&x, z) >= 3.0 * eps {
                    support_bad += 1;
                }
            }
            if bx.iter().filter(|b| **b > 0.0).count() > cap {
                count_bad += 1;
            }
            let dxy = dist(&x, &y);
            if bx.iter().zip(&by).any(|(p, q)| (p - q).abs() > lip * dxy + 1e-15) {
                lip_bad += 1;
            }
        }
    }
    let partition_ok = sum_err <= 1e-12 && support_bad + count_bad + lip_bad + neg == 0;

    let (target, lipschitz) = (0.1, 2.0);
    let domain = ConvexDomain::unit_box(1);
    let net = maximal_net_default(&domain, target / (3.0 * lipschitz)).unwrap();
    let basis = BasisFamily::from_partition(PartitionOfUnity::new(net), lipschitz, target, 1).unwrap();
    let mut worst_approx: f64 = 0.0;
    for seed in 0..50 {
        let w = WeightFunction::random_piecewise_linear(0.0, 1.0, lipschitz, 8, seed);
        let approx = basis.approximate_weights(&|c| w.eval(c)).unwrap();
        worst_approx = worst_approx.max(approx.max_error);
    }
    let basis_ok = worst_approx <= target;

    let mut worst_gap: f64 = 0.0;
    let br_eps = 0.1;
    let mut shared: Option<PartitionOfUnity> = None;
    for name in ["matching_pennies", "coordination", "prisoners_dilemma"] {
        let game = FiniteGame::preset(name).unwrap();
        let domain = game.mixed_domain();
        let u = game.payoff_bound();
        let part = shared.get_or_insert_with(|| {
            let net = maximal_net_default(&domain, br_eps * u / (6.0 * u * 2f64.sqrt())).unwrap();
            PartitionOfUnity::new(net)
        });
        let probes: Vec<Vec<f64>> = (0..2000).map(|_| sample(&domain, &mut rng)).collect();
        for i in 0..game.players {
            let player = game.player(i);
            let g = SmoothBestReply::with_partition(&player, part.clone());
            worst_gap = worst_gap.max(g.max_gap(&player, &probes) / u);
        }
    }
    let br_ok = worst_gap <= br_eps;
    (
        partition_ok && basis_ok && br_ok,
        format!(
            "partition: |Σβ−1| ≤ {sum_err:.1e}, support/count/Lipschitz/sign violations {support_bad}/{count_bad}/{lip_bad}/{neg}; \
             basis error {worst_approx:.4} ≤ {target} over 50 functions; best-reply gap {worst_gap:.4} ≤ {br_eps} (payoff units of U, 2x2 presets)"
        ),
    )
}

fn max_weak(t: &Transcript, ws: &[WeightFunction]) -> f64 {
    ws.iter().map(|w| weak_score(t, w).unwrap()).fold(0.0, f64::max)
}

struct GameResult {
    name: &'static str,
    transcript: Transcript,
    stats: SolverStats,
    replay_identical: bool,
}

fn weak_calibration(solver: &mut SolverStats, runs: &mut Vec<GameResult>) -> Outcome {
    let settings = ForecasterSettings::desk_unit_interval();
    let mut domain_settings = settings.clone();
    domain_settings.actions = ActionSet::Domain;
    let binary = WeakForecaster::from_settings(settings.clone()).unwrap();
    let continuous = WeakForecaster::from_settings(domain_settings).unwrap();
    let mut tested = binary.config().basis_weights();
    for seed in 0..20 {
        tested.push(WeightFunction::random_piecewise_linear(0.0, 1.0, 4.0, 8, seed));
    }
    let recall = settings.recall;
    let periods = 50 * recall;
    let cases: Vec<(&'static str, AdversaryKind, ActionSet, &WeakForecaster)> = vec![
        ("threshold", AdversaryKind::Threshold { cut: 0.5 }, ActionSet::binary(), &binary),
        ("random", AdversaryKind::SeededRandom { salt: 1 }, ActionSet::binary(), &binary),
        ("reaction", AdversaryKind::Reaction { g: ReactionMap::flip() }, ActionSet::Domain, &continuous),
        ("best-response", AdversaryKind::SimulatingBestResponse { targets: tested.clone() }, ActionSet::binary(), &binary),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (name, kind, actions, fc) in cases {
        let adversary = Adversary::leaky(kind);
        let run = play(&Forecaster::weak(fc.clone()), &adversary, &actions, periods, 7).unwrap();
        let scores: Vec<f64> = [recall, 5 * recall, periods].iter().map(|&n| max_weak(&run.transcript.prefix(n), &tested)).collect();
        let monotone = scores.windows(2).all(|w| w[1] <= w[0]);
        let last = scores[2];
        ok &= last <= 0.05 && monotone;
        details.push(format!("{name} S@R,5R,50R = {:.4},{:.4},{:.4}", scores[0], scores[1], scores[2]));
        let replay = play(&Forecaster::weak(fc.clone()), &adversary, &actions, periods, 7).unwrap();
        let identical = run
            .transcript
            .iter()
            .zip(replay.transcript.iter())
            .all(|((c1, a1), (c2, a2))| c1.iter().chain(a1).zip(c2.iter().chain(a2)).all(|(p, q)| p.to_bits() == q.to_bits()));
        let stats = run.stats.clone().unwrap();
        solver.merge(&stats);
        runs.push(GameResult { name, transcript: run.transcript, stats, replay_identical: identical });
    }
    (ok, format!("max over {} weights ≤ 0.05 and decreasing: {}", tested.len(), details.join("; ")))
}

fn separation(runs: &[GameResult]) -> Outcome {
    let Some(run) = runs.iter().find(|r| r.name == "threshold") else {
        return (false, "threshold run missing".into());
    };
    let t = run.transcript.prefix(10_000);
    let k = calibration_score(&t).unwrap();
    let kl = smoothed_score(&t, SmoothingKernel::tent(0.05), SmoothedVariant::BothSmoothed).unwrap();
    (k >= 0.45 && kl <= 0.1, format!("T=10000: K = {k:.4} (≥ 0.45), K^Λ(tent 0.05) = {kl:.4} (≤ 0.1)"))
}

fn random_transcript(rng: &mut ChaCha8Rng, m: usize, len: usize, levels: usize) -> Transcript {
    let domain = ConvexDomain::unit_box(m);
    let bias: f64 = rng.gen_range(0.0..0.5);
    let mut t = Transcript::new(domain);
    for _ in 0..len {
        let c: Vec<f64> = (0..m).map(|_| rng.gen_range(0..=levels) as f64 / levels as f64).collect();
        let a: Vec<f64> = c
            .iter()
            .map(|v| {
                let p = (v + bias * (rng.gen::<f64>() - 0.5)).clamp(0.0, 1.0);
                if rng.gen::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        t.push(&c, &a).unwrap();
    }
    t
}

fn score_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut indicator_bad, mut smoothing_bad, mut lemma_bad, mut sup_bad) = (0, 0, 0, 0);
    for i in 0..100 {
        let m = 1 + i % 2;
        let t = random_transcript(&mut rng, m, 200 + 10 * i, 4 + i % 7);
        let k = calibration_score(&t).unwrap();
        let (both, action) = smoothed_scores(&t, SmoothingKernel::Indicator).unwrap();
        if both.to_bits() != k.to_bits() || action.to_bits() != k.to_bits() {
            indicator_bad += 1;
        }
        let delta = [0.1, 0.25, 0.5][i % 3];
        let kernel = SmoothingKernel::tent(delta);
        let kl = smoothed_score(&t, kernel, SmoothedVariant::BothSmoothed).unwrap();
        let alpha = t.domain().diameter();
        let rhs = gamma(m, alpha) * kernel.lipschitz().powf(m as f64 / 2.0) * k.sqrt();
        if kl > rhs {
            smoothing_bad += 1;
        }
        let (sup, kt) = indicator_sup_bound(&t).unwrap();
        if kt > 2.0 * m as f64 * sup * (1.0 + 1e-12) {
            sup_bad += 1;
        }
    }
    for i in 0..100 {
        let m = 1 + i % 2;
        let n = 100 + 5 * i;
        let forecasts: Vec<Vec<f64>> =
            (0..n).map(|_| (0..m).map(|_| rng.gen_range(0..=10) as f64 / 10.0).collect()).collect();
        let residuals: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let alpha = (m as f64).sqrt();
        let kernel = SmoothingKernel::tent([0.1, 0.2, 0.5][i % 3]);
        let b = averaging_bound(&forecasts, &residuals, kernel, alpha).unwrap();
        if !b.holds() || b.lhs > b.rhs_exact {
            lemma_bad += 1;
        }
    }
    let total = indicator_bad + smoothing_bad + lemma_bad + sup_bad;
    (
        total == 0,
        format!(
            "violations: indicator reduction {indicator_bad}, smoothing bound {smoothing_bad}, averaging lemma {lemma_bad}, K ≤ 2m·sup {sup_bad} (100 instances each)"
        ),
    )
}

fn nash_dynamics(solver: &mut SolverStats) -> Outcome {
    let periods = 20_000;
    let seeds = 10;
    let mut ok = true;
    let mut details = Vec::new();
    let mut replay_checks = 0;
    for name in ["coordination", "prisoners_dilemma"] {
        let game = FiniteGame::preset(name).unwrap();
        let mut worst: f64 = 1.0;
        for seed in 0..seeds {
            let run = run_smooth_calibrated_learning(&game, &DynamicConfig::desk(&game, periods, seed)).unwrap();
            worst = worst.min(run.fraction_in_ne(0.3, 0));
            solver.merge(&run.solver);
            replay_checks += run.replay_checks;
        }
        ok &= worst >= 0.7;
        details.push(format!("{name} min ne_fraction(0.3) = {worst:.3} (≥ 0.7)"));
    }
    let game = FiniteGame::matching_pennies();
    let q = periods / 4;
    let (mut q1, mut q4) = (0.0, 0.0);
    let mut halved = 0;
    let mut mean = vec![0.0; game.dim()];
    for seed in 0..seeds {
        let run = run_smooth_calibrated_learning(&game, &DynamicConfig::desk(&game, periods, seed)).unwrap();
        let (a, b) = (run.mean_fixed_gap(0, q), run.mean_fixed_gap(3 * q, periods));
        q1 += a / seeds as f64;
        q4 += b / seeds as f64;
        halved += (b <= 0.5 * a) as usize;
        for (m, v) in mean.iter_mut().zip(run.mean_forecast(0)) {
            *m += v / seeds as f64;
        }
        solver.merge(&run.solver);
        replay_checks += run.replay_checks;
    }
    let uniform = vec![0.5; game.dim()];
    let off = dist(&mean, &uniform);
    ok &= q4 <= 0.5 * q1 && off <= 0.1;
    details.push(format!(
        "matching pennies mean ||g(c)−c|| Q1 = {q1:.4}, Q4 = {q4:.4} (≤ half; {halved}/{seeds} seeds individually), time-average forecast {off:.3} from uniform (≤ 0.1)"
    ));
    details.push(format!("{replay_checks} bit-exact state replays"));
    (ok, details.join("; "))
}

fn continuous(solver: &mut SolverStats) -> Outcome {
    let game = ContinuousGame::quadratic(0.3);
    let config = ContinuousConfig::desk(&game, 5000);
    let burn_in = config.forecaster.recall;
    let run = run_continuous_dynamic(&game, &config).unwrap();
    solver.merge(&run.solver);
    let frac = run.pne_fraction(0.1, burn_in);
    let mut ok = frac >= 0.9 && run.warnings.is_empty();
    let mut details = vec![format!("quadratic pne_fraction(0.1) after R={burn_in}: {frac:.3} (≥ 0.9)")];
    for name in FiniteGame::PRESETS {
        let game = FiniteGame::preset(name).unwrap();
        let grid = game.profile_grid(6);
        let run = run_exhaustive_search(&game, &grid, 0.1, grid.len() + 2, 5).unwrap();
        let locked = match (&run.locked_at, &run.profile) {
            (Some(t), Some(p)) => eps_nash_check(&game, p, 0.1).unwrap().is_member.then_some(*t),
            _ => None,
        };
        ok &= locked.is_some();
        details.push(format!("{name} locked at {locked:?}"));
    }
    (ok, details.join("; "))
}

fn solver_quality(solver: &mut SolverStats, runs: &[GameResult]) -> Outcome {
    let frac = solver.fine as f64 / solver.periods.max(1) as f64;
    let identical = runs.iter().all(|r| r.replay_identical) && !runs.is_empty();
    let per_run: Vec<String> = runs.iter().map(|r| format!("{} {}/{}", r.name, r.stats.fine, r.stats.periods)).collect();
    (
        frac >= 0.999 && solver.max_residual <= 1e-3 && identical,
        format!(
            "{}/{} periods at residual ≤ 1e-8 ({:.4}%), max residual {:.2e} (≤ 1e-3), replays bit-identical: {identical} ({})",
            solver.fine,
            solver.periods,
            100.0 * frac,
            solver.max_residual,
            per_run.join(", ")
        ),
    )
}

fn schedules() -> Outcome {
    let mut bad = Vec::new();
    for eps in [0.05, 0.1, 0.2, 0.5] {
        for d in 1..=4 {
            let p = tune_parameters(eps, 1.0, 1.0, d);
            let q = p.eps_normalized / 4.0;
            if p.conditions().iter().any(|(_, v)| *v > q) {
                bad.push(format!("tune_parameters ε={eps} d={d}"));
            }
        }
    }
    for (eps, n, m, u) in [(0.1, 2, 4, 1.0), (0.05, 2, 4, 5.0), (0.2, 3, 6, 2.0)] {
        let s = tune_dynamic_parameters(eps, n, m, u);
        let (e5, e3) = s.identity_errors();
        if e5 > 1e-12 || e3 > 1e-12 {
            bad.push(format!("schedule ε={eps}: {e5:.1e}/{e3:.1e}"));
        }
    }
    (bad.is_empty(), if bad.is_empty() { "all ε/4 conditions and ε5 = 3ε, ε3 = 3εε4 identities hold on recomputation".into() } else { bad.join("; ") })
}
