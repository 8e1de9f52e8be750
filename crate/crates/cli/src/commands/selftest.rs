use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;
use smoothcal::dynamics::{eps_nash_check, run_exhaustive_search, tune_dynamic_parameters, FiniteGame};
use smoothcal::forecaster::{ActionSet, ForecasterSettings, WeakForecaster};
use smoothcal::game::{play, Adversary, AdversaryKind, Forecaster};
use smoothcal::geometry::{maximal_net_default, ConvexDomain, PartitionOfUnity};
use smoothcal::regression::{
    block_expand, d2, loss, regret_report, theta_grid, tune_parameters, DataGenerator, DataKind, Observation,
    Regressor, RegressorParams, Variant,
};
use smoothcal::rng::CounterRng;
use smoothcal::scores::{
    averaging_bound, calibration_score, gamma, indicator_sup_bound, smoothed_score, SmoothedVariant, SmoothingKernel,
    Transcript,
};

use super::config_block;
use crate::cli::Context;
use crate::error::{CliError, CliResult};
use crate::output::{num, Check, OutDir};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestParams {
    /// Random transcripts per score inequality.
    #[arg(long)]
    pub transcripts: Option<usize>,
    /// Periods of the forecaster replay check.
    #[arg(long, visible_alias = "T")]
    pub periods: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
struct Resolved {
    transcripts: usize,
    periods: usize,
}

type Suite = Vec<Check>;

fn internal(e: smoothcal::Error) -> CliError {
    CliError::Abort { period: e.period(), message: e.to_string() }
}

/// Transcript on `[0,1]^m` with forecasts on a grid and biased binary actions.
fn random_transcript(rng: &CounterRng, key: u64, m: usize, len: usize) -> Transcript {
    let mut t = Transcript::new(ConvexDomain::unit_box(m));
    let bias = 0.5 * rng.uniform(key, 0);
    for s in 0..len as u64 {
        let c: Vec<f64> = (0..m as u64).map(|j| (rng.uniform(key, 1 + 4 * s + j) * 10.0).floor() / 10.0).collect();
        let a: Vec<f64> = c
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let u = rng.uniform(key, 1 << 40 | (4 * s + j as u64));
                let p = (v + bias - 0.25).clamp(0.0, 1.0);
                if u < p {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        t.push(&c, &a).expect("grid points lie in the unit box");
    }
    t
}

fn scores(r: &Resolved, seed: u64, out: &mut Suite) -> CliResult<()> {
    let rng = CounterRng::new(seed);
    let (mut bitwise, mut smoothing, mut sup_excess, mut lemma) = (true, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..r.transcripts as u64 {
        let m = 1 + (k % 2) as usize;
        let t = random_transcript(&rng, k, m, 60);
        let kt = calibration_score(&t).map_err(internal)?;
        let ind = smoothed_score(&t, SmoothingKernel::Indicator, SmoothedVariant::BothSmoothed).map_err(internal)?;
        bitwise &= ind.to_bits() == kt.to_bits();
        let kernel = SmoothingKernel::tent(0.1 + 0.3 * rng.uniform(k, 1 << 50));
        let alpha = t.domain().diameter();
        let smooth = smoothed_score(&t, kernel, SmoothedVariant::BothSmoothed).map_err(internal)?;
        let rhs = gamma(m, alpha) * kernel.lipschitz().powf(m as f64 / 2.0) * kt.sqrt();
        smoothing = smoothing.max(if rhs > 0.0 { smooth / rhs } else { smooth });
        let (sup, _) = indicator_sup_bound(&t).map_err(internal)?;
        sup_excess = sup_excess.max(kt - 2.0 * m as f64 * sup);
        let cs: Vec<Vec<f64>> = t.iter().map(|(c, _)| c.to_vec()).collect();
        let bs: Vec<Vec<f64>> = t.iter().map(|(c, a)| a.iter().zip(c).map(|(x, y)| x - y).collect()).collect();
        let b = averaging_bound(&cs, &bs, kernel, alpha).map_err(internal)?;
        lemma = lemma.max(b.lhs / b.rhs);
    }
    out.push(Check::holds("indicator kernel reproduces K_T bit for bit", bitwise));
    out.push(Check::at_most("smoothed score over gamma L^(m/2) sqrt(K_T)", smoothing, 1.0 + 1e-12));
    out.push(Check::at_most("K_T minus 2m sup S_T^w", sup_excess, 1e-12));
    out.push(Check::at_most("averaging lemma lhs over rhs", lemma, 1.0 + 1e-12));
    Ok(())
}

fn regression(out: &mut Suite) -> CliResult<()> {
    let mut worst: f64 = 0.0;
    for d in 1..=2 {
        let (a, lambda) = (1.0, 0.9);
        let gen = DataGenerator::new(DataKind::Random, d, 3);
        let data: Vec<Observation> = (1..=30).map(|t| gen.observation(t, 0.0)).collect();
        let mut disc = Regressor::new(RegressorParams::new(Variant::Discounted { lambda }, a, d)).map_err(internal)?;
        let expanded = block_expand(&data, a, lambda).map_err(internal)?;
        let unbounded = RegressorParams::new(Variant::Forward, a, d).with_bounds(f64::INFINITY, f64::INFINITY);
        let mut fwd = Regressor::new(unbounded).map_err(internal)?;
        let mut ends = Vec::new();
        for obs in &expanded {
            ends.push(fwd.predict(&obs.x).map_err(internal)?.theta);
            fwd.update(obs.clone()).map_err(internal)?;
        }
        for (t, obs) in data.iter().enumerate() {
            let th = disc.predict(&obs.x).map_err(internal)?.theta;
            disc.update(obs.clone()).map_err(internal)?;
            for (p, q) in th.iter().zip(&ends[(t + 1) * (d + 1) - 1]) {
                worst = worst.max((p - q).abs());
            }
        }
    }
    out.push(Check::at_most("block reduction max |theta difference|", worst, 1e-9));

    let (d, lambda, recall) = (2, 0.7, 25);
    let bound = d2(d, 1.0, lambda) * f64::powi(lambda, recall as i32);
    let gen = DataGenerator::new(DataKind::Random, d, 5);
    let mut win = Regressor::new(RegressorParams::new(Variant::Windowed { lambda, recall }, 1.0, d)).map_err(internal)?;
    let mut disc = Regressor::new(RegressorParams::new(Variant::Discounted { lambda }, 1.0, d)).map_err(internal)?;
    let mut gap: f64 = 0.0;
    for t in 1..=2000 {
        let obs = gen.observation(t, 0.0);
        let tw = win.predict(&obs.x).map_err(internal)?.theta;
        let td = disc.predict(&obs.x).map_err(internal)?.theta;
        gap = gap.max((loss(&tw, &obs) - loss(&td, &obs)).abs());
        win.update(obs.clone()).map_err(internal)?;
        disc.update(obs).map_err(internal)?;
    }
    out.push(Check::at_most("windowed vs discounted loss gap", gap, bound));

    let mut tuned = true;
    for eps in [0.2, 0.1, 0.05] {
        for d in 1..=3 {
            tuned &= tune_parameters(eps, 1.0, 1.0, d).satisfied();
        }
    }
    out.push(Check::holds("tuned regression parameters meet their conditions", tuned));

    let tp = tune_parameters(0.1, 1.0, 1.0, 1);
    let recall = tp.recall_usize().expect("tuned recall for d = 1 fits");
    let params = RegressorParams::new(Variant::Windowed { lambda: tp.lambda, recall }, tp.a, 1);
    let gen = DataGenerator::new(DataKind::Random, 1, 11);
    let data: Vec<Observation> = (1..=2 * recall as u64).map(|t| gen.observation(t, 0.0)).collect();
    let report = regret_report(&params, &data, &theta_grid(1), 0.1).map_err(internal)?;
    out.push(Check::at_most("regret bound violations at T = 2R", (report.violations.0 + report.violations.1) as f64, 0.0));
    Ok(())
}

fn geometry(seed: u64, out: &mut Suite) -> CliResult<()> {
    let rng = CounterRng::new(seed);
    let domains = [ConvexDomain::unit_box(2), ConvexDomain::simplex(3).map_err(internal)?];
    let mut drift: f64 = 0.0;
    for (k, d) in domains.iter().enumerate() {
        for s in 0..500u64 {
            let b: Vec<f64> = (0..d.dim() as u64).map(|j| 3.0 * rng.uniform(s, 8 * k as u64 + j) - 1.0).collect();
            let p = d.project(&b).map_err(internal)?;
            let q = d.project(&p).map_err(internal)?;
            drift = drift.max(p.iter().zip(&q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
        }
    }
    out.push(Check::at_most("projection idempotence", drift, 1e-12));

    let part = PartitionOfUnity::new(maximal_net_default(&ConvexDomain::unit_box(2), 0.2).map_err(internal)?);
    let mut err: f64 = 0.0;
    for s in 0..1000u64 {
        let x = [rng.uniform(s, 100), rng.uniform(s, 101)];
        let sum: f64 = part.eval(&x).map_err(internal)?.iter().sum();
        err = err.max((sum - 1.0).abs());
    }
    out.push(Check::at_most("partition of unity sums to one", err, 1e-12));
    Ok(())
}

fn game(r: &Resolved, seed: u64, out: &mut Suite) -> CliResult<()> {
    let f = Forecaster::alternating(ConvexDomain::unit_box(1), vec![0.5001], vec![0.4999]);
    let adv = Adversary::leaky(AdversaryKind::Threshold { cut: 0.5 });
    let run = play(&f, &adv, &ActionSet::binary(), 4, 0).map_err(internal)?;
    let pairs: Vec<(f64, f64)> = run.transcript.iter().map(|(c, a)| (c[0], a[0])).collect();
    out.push(Check::holds(
        "alternating vs threshold hand trace",
        pairs == [(0.5001, 0.0), (0.4999, 1.0), (0.5001, 0.0), (0.4999, 1.0)],
    ));

    let weak = Forecaster::weak(WeakForecaster::from_settings(ForecasterSettings::desk_unit_interval()).map_err(internal)?);
    let adv = Adversary::leaky(AdversaryKind::SeededRandom { salt: 1 });
    let a = play(&weak, &adv, &ActionSet::binary(), r.periods, seed).map_err(internal)?;
    let b = play(&weak, &adv, &ActionSet::binary(), r.periods, seed).map_err(internal)?;
    let same = a
        .transcript
        .iter()
        .zip(b.transcript.iter())
        .all(|((c1, a1), (c2, a2))| c1.iter().chain(a1).zip(c2.iter().chain(a2)).all(|(p, q)| p.to_bits() == q.to_bits()));
    out.push(Check::holds("weak forecaster replays bit for bit", same));
    let stats = a.stats.unwrap_or_default();
    out.push(Check::at_least("fraction of periods with residual <= 1e-8", stats.fine as f64 / stats.periods.max(1) as f64, 0.999));
    out.push(Check::at_most("largest fixed-point residual", stats.max_residual, 1e-3));
    Ok(())
}

fn dynamics(out: &mut Suite) -> CliResult<()> {
    let mp = FiniteGame::matching_pennies();
    let check = eps_nash_check(&mp, &[0.6, 0.4, 0.5, 0.5], 0.1).map_err(internal)?;
    out.push(Check::holds("matching pennies gaps (0, 0.2)", check.gaps[0].abs() <= 1e-12 && (check.gaps[1] - 0.2).abs() <= 1e-12 && !check.is_member));
    let pd = FiniteGame::prisoners_dilemma();
    let grid = pd.profile_grid(1);
    let run = run_exhaustive_search(&pd, &grid, 0.0, grid.len() + 2, 1).map_err(internal)?;
    out.push(Check::holds("exhaustive search locks on defect/defect", run.profile == Some(pd.embed(&[1, 1]))));
    let mut worst: f64 = 0.0;
    for eps in [0.05, 0.1, 0.5] {
        for (n, m) in [(2, 4), (3, 6)] {
            let s = tune_dynamic_parameters(eps, n, m, 1.0);
            let (e5, e3) = s.identity_errors();
            worst = worst.max(e5).max(e3);
        }
    }
    out.push(Check::at_most("schedule identity relative error", worst, 1e-12));
    Ok(())
}

pub fn run(ctx: &Context, p: SelftestParams) -> CliResult<bool> {
    let r = Resolved { transcripts: p.transcripts.unwrap_or(100), periods: p.periods.unwrap_or(2000) };
    if r.transcripts == 0 || r.periods == 0 {
        return Err(CliError::spec("transcripts and periods must be >= 1"));
    }
    let mut suite = Suite::new();
    scores(&r, ctx.seed, &mut suite)?;
    regression(&mut suite)?;
    geometry(ctx.seed, &mut suite)?;
    game(&r, ctx.seed, &mut suite)?;
    dynamics(&mut suite)?;

    let out = OutDir::create(&ctx.out)?;
    let mut csv = out.csv("selftest.csv", &["name".into(), "value".into(), "bound".into(), "pass".into()])?;
    for c in &suite {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        csv.write_record([c.name.clone(), opt(c.value), opt(c.bound), c.pass.to_string()])?;
    }
    csv.flush()?;
    let passed = suite.iter().filter(|c| c.pass).count();
    let results = json!({ "passed": passed, "total": suite.len() });
    out.summary("selftest", config_block(ctx, json!(r)), results, &suite)
}
