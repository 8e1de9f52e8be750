use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::finite::{nash_gaps, FiniteGame};
use super::schedule::DynamicSchedule;
use crate::error::{Error, Result};
use crate::forecaster::{ActionSet, ForecasterSettings, Profile, SolverStats, WeakForecaster};
use crate::geometry::{maximal_net_default, PartitionOfUnity, SmoothBestReply};
use crate::linalg::dist;
use crate::rng::CounterRng;
use crate::scores::SmoothingKernel;

/// Settings of one smooth calibrated learning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicConfig {
    pub profile: Profile,
    pub forecaster: ForecasterSettings,
    /// Net radius behind every player's smoothed best reply.
    pub reply_net_radius: f64,
    /// Tent width used by the diagnostics.
    pub kernel_delta: f64,
    pub periods: usize,
    pub seed: u64,
    /// Levels `ε` at which the equilibrium fraction is reported.
    pub ne_eps: Vec<f64>,
    /// Period spacing of the shared-forecast replay check.
    pub replay_every: usize,
    /// Theory constants, reported alongside desk runs.
    pub schedule: Option<DynamicSchedule>,
}

impl DynamicConfig {
    /// Desk configuration for `game`.
    pub fn desk(game: &FiniteGame, periods: usize, seed: u64) -> Self {
        let mut forecaster = ForecasterSettings::desk(game.mixed_domain(), ActionSet::Domain);
        forecaster.net_radius = 0.15;
        forecaster.grid_radius = Some(0.005);
        forecaster.lambda = 0.9999;
        forecaster.recall = 20_000;
        Self {
            profile: Profile::Desk,
            forecaster,
            reply_net_radius: 0.25,
            kernel_delta: 0.1,
            periods,
            seed,
            ne_eps: vec![0.05, 0.1, 0.2, 0.3],
            replay_every: 1000,
            schedule: None,
        }
    }
}

/// One period of play.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub t: usize,
    pub c: Vec<f64>,
    pub x: Vec<f64>,
    /// Realized pure profile as unit vectors.
    pub a: Vec<f64>,
    /// Largest gain from a pure deviation at `x_t`.
    pub ne_gap: f64,
    /// `||g(c_t) − c_t||`.
    pub fixed_gap: f64,
}

/// Measured proof quantities of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `(1/T)Σ||ā^Λ_t − c^Λ_t||`.
    pub smoothed_score: f64,
    /// `(1/T)Σ||ā^Λ_t − x̄^Λ_t||` at `T/4`, `T/2` and `T`.
    pub action_behavior_gap: Vec<(usize, f64)>,
    /// `(1/T)Σ||x_t − c_t||`.
    pub behavior_forecast_gap: f64,
    /// `(1/T)Σ||x̄^Λ_t − x_t||` and `(1/T)Σ||c^Λ_t − c_t||`.
    pub smoothing_gaps: (f64, f64),
    /// Sum of the four measured terms that bound `behavior_forecast_gap`.
    pub behavior_forecast_bound: f64,
    /// `(threshold, fraction above, mean gap / threshold)`.
    pub markov: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsRun {
    pub game: String,
    pub steps: Vec<Step>,
    /// `(ε, fraction of periods with x_t ∈ NE(ε))`.
    pub ne_fraction: Vec<(f64, f64)>,
    pub diagnostics: Diagnostics,
    pub solver: SolverStats,
    pub replay_checks: usize,
}

impl DynamicsRun {
    pub fn fraction_in_ne(&self, eps: f64, from: usize) -> f64 {
        let tail = &self.steps[from.min(self.steps.len())..];
        if tail.is_empty() {
            return 0.0;
        }
        tail.iter().filter(|s| s.ne_gap <= eps).count() as f64 / tail.len() as f64
    }

    pub fn mean_fixed_gap(&self, from: usize, to: usize) -> f64 {
        let s = &self.steps[from..to.min(self.steps.len())];
        s.iter().map(|s| s.fixed_gap).sum::<f64>() / s.len().max(1) as f64
    }

    /// Time average of forecasts over periods `from..`.
    pub fn mean_forecast(&self, from: usize) -> Vec<f64> {
        let tail = &self.steps[from.min(self.steps.len())..];
        let m = self.steps.first().map_or(0, |s| s.c.len());
        let mut acc = vec![0.0; m];
        for s in tail {
            for (a, c) in acc.iter_mut().zip(&s.c) {
                *a += c;
            }
        }
        acc.iter().map(|v| v / tail.len().max(1) as f64).collect()
    }
}

/// Builds every player's `g^i` over a common partition of `X`.
pub fn best_replies(game: &FiniteGame, net_radius: f64) -> Result<Vec<SmoothBestReply>> {
    let net = maximal_net_default(&game.mixed_domain(), net_radius)?;
    let part = PartitionOfUnity::new(net);
    Ok((0..game.players).map(|i| SmoothBestReply::with_partition(&game.player(i), part.clone())).collect())
}

/// `g(c) = (g^1(c), …, g^n(c))`.
pub(crate) fn joint_reply(replies: &[SmoothBestReply], c: &[f64], scratch: &mut Vec<(usize, f64)>, out: &mut [f64]) {
    for g in replies {
        let b = g.block();
        g.eval_into(c, scratch, &mut out[b]);
    }
}

/// All players share one forecaster; each plays `x_t^i = g^i(c_t)` and the
/// realized pure profile is fed back as unit vectors.
pub fn run_smooth_calibrated_learning(game: &FiniteGame, config: &DynamicConfig) -> Result<DynamicsRun> {
    game.validate()?;
    if config.forecaster.domain != game.mixed_domain() {
        return Err(Error::InvalidParameter("forecaster domain must be the game's mixed profiles".into()));
    }
    let replies = best_replies(game, config.reply_net_radius)?;
    let mut fc = WeakForecaster::from_settings(config.forecaster.clone())?;
    let rng = CounterRng::new(config.seed);
    let m = game.dim();
    let mut steps = Vec::with_capacity(config.periods);
    let mut scratch = Vec::new();
    let mut replay_checks = 0;
    for t in 0..config.periods {
        if config.replay_every > 0 && t > 0 && t % config.replay_every == 0 {
            let replica = WeakForecaster::from_json(&fc.to_json()).map_err(|e| e.at(t + 1))?;
            let (c1, c2) = (fc.peek().map_err(|e| e.at(t + 1))?.c, replica.peek().map_err(|e| e.at(t + 1))?.c);
            if c1.iter().zip(&c2).any(|(p, q)| p.to_bits() != q.to_bits()) {
                return Err(Error::BoundViolation(format!("shared forecast diverged at period {}", t + 1)));
            }
            replay_checks += 1;
        }
        let c = fc.forecast().map_err(|e| e.at(t + 1))?.c;
        let mut x = vec![0.0; m];
        joint_reply(&replies, &c, &mut scratch, &mut x);
        let pure: Vec<usize> =
            (0..game.players).map(|i| rng.categorical(t as u64, i as u64, &x[game.block(i)])).collect();
        let a = game.embed(&pure);
        fc.observe(&c, &a).map_err(|e| e.at(t + 1))?;
        let ne_gap = nash_gaps(game, &x, 0.0).worst_gap;
        let fixed_gap = dist(&x, &c);
        steps.push(Step { t: t + 1, c, x, a, ne_gap, fixed_gap });
    }
    let ne_fraction = config
        .ne_eps
        .iter()
        .map(|&e| (e, steps.iter().filter(|s| s.ne_gap <= e).count() as f64 / steps.len().max(1) as f64))
        .collect();
    let diagnostics = diagnostics(&steps, SmoothingKernel::tent(config.kernel_delta));
    Ok(DynamicsRun {
        game: game.name.clone(),
        steps,
        ne_fraction,
        diagnostics,
        solver: fc.stats().clone(),
        replay_checks,
    })
}

struct Smoothed {
    a: Vec<f64>,
    x: Vec<f64>,
    c: Vec<f64>,
}

/// Forecast, count, action sum, behavior sum.
type Group = (Vec<f64>, f64, Vec<f64>, Vec<f64>);

/// Kernel averages of `a`, `x` and `c` around every distinct forecast of `steps`.
fn smooth(steps: &[Step], kernel: SmoothingKernel) -> (HashMap<Vec<u64>, usize>, Vec<Smoothed>) {
    let m = steps.first().map_or(0, |s| s.c.len());
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut groups: Vec<Group> = Vec::new();
    for s in steps {
        let key: Vec<u64> = s.c.iter().map(|v| v.to_bits()).collect();
        let g = *index.entry(key).or_insert_with(|| {
            groups.push((s.c.clone(), 0.0, vec![0.0; m], vec![0.0; m]));
            groups.len() - 1
        });
        groups[g].1 += 1.0;
        for j in 0..m {
            groups[g].2[j] += s.a[j];
            groups[g].3[j] += s.x[j];
        }
    }
    let out = groups
        .iter()
        .map(|(c0, _, _, _)| {
            let mut w = 0.0;
            let (mut a, mut x, mut c) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
            for (ch, n, sa, sx) in &groups {
                let lam = kernel.eval(ch, c0);
                if lam <= 0.0 {
                    continue;
                }
                w += lam * n;
                for j in 0..m {
                    a[j] += lam * sa[j];
                    x[j] += lam * sx[j];
                    c[j] += lam * n * ch[j];
                }
            }
            for v in a.iter_mut().chain(x.iter_mut()).chain(c.iter_mut()) {
                *v /= w;
            }
            Smoothed { a, x, c }
        })
        .collect();
    (index, out)
}

fn diagnostics(steps: &[Step], kernel: SmoothingKernel) -> Diagnostics {
    let total = steps.len();
    let mut gap_series = Vec::new();
    for n in [total / 4, total / 2, total] {
        if n == 0 {
            continue;
        }
        let (index, sm) = smooth(&steps[..n], kernel);
        let mut acc = 0.0;
        for s in &steps[..n] {
            let key: Vec<u64> = s.c.iter().map(|v| v.to_bits()).collect();
            let g = &sm[index[&key]];
            acc += dist(&g.a, &g.x);
        }
        gap_series.push((n, acc / n as f64));
    }
    let (index, sm) = smooth(steps, kernel);
    let (mut score, mut xc, mut xs, mut cs) = (0.0, 0.0, 0.0, 0.0);
    for s in steps {
        let key: Vec<u64> = s.c.iter().map(|v| v.to_bits()).collect();
        let g = &sm[index[&key]];
        score += dist(&g.a, &g.c);
        xc += dist(&s.x, &s.c);
        xs += dist(&g.x, &s.x);
        cs += dist(&g.c, &s.c);
    }
    let tf = total.max(1) as f64;
    let (score, xc, xs, cs) = (score / tf, xc / tf, xs / tf, cs / tf);
    let ax = gap_series.last().map_or(0.0, |g| g.1);
    let mean_gap = steps.iter().map(|s| s.fixed_gap).sum::<f64>() / tf;
    let markov = [0.05, 0.1, 0.2, 0.3]
        .iter()
        .map(|&th| {
            let above = steps.iter().filter(|s| s.fixed_gap > th).count() as f64 / tf;
            (th, above, mean_gap / th)
        })
        .collect();
    Diagnostics {
        smoothed_score: score,
        action_behavior_gap: gap_series,
        behavior_forecast_gap: xc,
        smoothing_gaps: (xs, cs),
        behavior_forecast_bound: score + ax + xs + cs,
        markov,
    }
}

