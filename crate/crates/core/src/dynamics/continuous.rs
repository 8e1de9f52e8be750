use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forecaster::{ActionSet, ForecasterSettings, SolverStats, WeakForecaster};
use crate::geometry::{maximal_net_default, BestReplyOracle, ConvexDomain, PartitionOfUnity, SmoothBestReply};

type Payoff = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A game where player `i` picks a scalar in `[lo_i, hi_i]` and `u^i` is
/// evaluated on the joint action.
#[derive(Clone)]
pub struct ContinuousGame {
    pub name: String,
    pub bounds: Vec<(f64, f64)>,
    payoffs: Vec<Arc<Payoff>>,
}

impl fmt::Debug for ContinuousGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuousGame").field("name", &self.name).field("bounds", &self.bounds).finish()
    }
}

impl ContinuousGame {
    pub fn new(name: impl Into<String>, bounds: Vec<(f64, f64)>, payoffs: Vec<Arc<Payoff>>) -> Result<Self> {
        if bounds.is_empty() || bounds.len() != payoffs.len() || bounds.iter().any(|(l, h)| !(l < h)) {
            return Err(Error::InvalidParameter("need one nonempty interval and payoff per player".into()));
        }
        Ok(Self { name: name.into(), bounds, payoffs })
    }

    /// One player with `u(x) = −(x − target)²` on `[0,1]`.
    pub fn quadratic(target: f64) -> Self {
        Self::new("quadratic", vec![(0.0, 1.0)], vec![Arc::new(move |a: &[f64]| -(a[0] - target).powi(2))]).unwrap()
    }

    /// Two players on `[0,1]` with `u¹ = u² = −(x¹ − x²)²`.
    pub fn team() -> Self {
        let u: Arc<Payoff> = Arc::new(|a: &[f64]| -(a[0] - a[1]).powi(2));
        Self::new("team", vec![(0.0, 1.0); 2], vec![u.clone(), u]).unwrap()
    }

    pub fn zero(players: usize) -> Self {
        let u: Arc<Payoff> = Arc::new(|_: &[f64]| 0.0);
        Self::new("zero", vec![(0.0, 1.0); players], vec![u; players]).unwrap()
    }

    pub fn players(&self) -> usize {
        self.bounds.len()
    }

    pub fn domain(&self) -> ConvexDomain {
        ConvexDomain::Box {
            lower: self.bounds.iter().map(|b| b.0).collect(),
            upper: self.bounds.iter().map(|b| b.1).collect(),
        }
    }

    pub fn payoff(&self, i: usize, a: &[f64]) -> f64 {
        (self.payoffs[i])(a)
    }

    /// Player `i` with a grid argmax of `steps` subintervals.
    pub fn player(&self, i: usize, steps: usize) -> ContinuousPlayer {
        ContinuousPlayer { index: i, bounds: self.bounds[i], steps, payoff: Arc::clone(&self.payoffs[i]) }
    }

    /// Largest pure-deviation gain at `a` over every player's grid.
    pub fn pne_gap(&self, a: &[f64], steps: usize) -> f64 {
        (0..self.players())
            .map(|i| {
                let p = self.player(i, steps);
                (p.best_value(a) - self.payoff(i, a)).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

/// One player's view of a continuous game.
#[derive(Clone)]
pub struct ContinuousPlayer {
    index: usize,
    bounds: (f64, f64),
    steps: usize,
    payoff: Arc<Payoff>,
}

impl ContinuousPlayer {
    fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        let (lo, hi) = self.bounds;
        (0..=self.steps).map(move |k| lo + (hi - lo) * k as f64 / self.steps as f64)
    }

    fn with_own(&self, y: f64, z: &[f64]) -> Vec<f64> {
        let mut p = z.to_vec();
        p[self.index] = y;
        p
    }

    /// Whether the `ε`-best-reply set to `z` is an interval of grid points.
    pub fn reply_set_is_interval(&self, z: &[f64], eps: f64) -> bool {
        let best = self.best_value(z);
        let ok: Vec<bool> = self.grid().map(|y| (self.payoff)(&self.with_own(y, z)) >= best - eps).collect();
        let first = ok.iter().position(|v| *v);
        let last = ok.iter().rposition(|v| *v);
        match (first, last) {
            (Some(f), Some(l)) => ok[f..=l].iter().all(|v| *v),
            _ => false,
        }
    }
}

impl BestReplyOracle for ContinuousPlayer {
    fn block(&self) -> Range<usize> {
        self.index..self.index + 1
    }

    fn best_reply(&self, z: &[f64]) -> Vec<f64> {
        let mut best = (f64::NEG_INFINITY, self.bounds.0);
        for y in self.grid() {
            let v = (self.payoff)(&self.with_own(y, z));
            if v > best.0 {
                best = (v, y);
            }
        }
        vec![best.1]
    }

    fn payoff(&self, own: &[f64], z: &[f64]) -> f64 {
        (self.payoff)(&self.with_own(own[0], z))
    }

    fn best_value(&self, z: &[f64]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for y in self.grid().chain(std::iter::once(z[self.index])) {
            best = best.max((self.payoff)(&self.with_own(y, z)));
        }
        best
    }
}

/// Settings of a continuous-game run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuousConfig {
    pub forecaster: ForecasterSettings,
    pub reply_net_radius: f64,
    /// Subintervals of the per-player argmax grid.
    pub argmax_steps: usize,
    pub periods: usize,
    pub pne_eps: f64,
    /// `ε` of the quasi-concavity spot check.
    pub concavity_eps: f64,
}

impl ContinuousConfig {
    pub fn desk(game: &ContinuousGame, periods: usize) -> Self {
        let mut forecaster = ForecasterSettings::desk(game.domain(), ActionSet::Domain);
        forecaster.net_radius = 0.1;
        forecaster.grid_radius = Some(0.005);
        Self { forecaster, reply_net_radius: 0.05, argmax_steps: 256, periods, pne_eps: 0.1, concavity_eps: 0.01 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuousRun {
    pub forecasts: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub pne_gaps: Vec<f64>,
    pub warnings: Vec<String>,
    pub solver: SolverStats,
}

impl ContinuousRun {
    /// Fraction of periods `t > from` with `a_t ∈ PNE(ε)`.
    pub fn pne_fraction(&self, eps: f64, from: usize) -> f64 {
        let tail = &self.pne_gaps[from.min(self.pne_gaps.len())..];
        if tail.is_empty() {
            return 0.0;
        }
        tail.iter().filter(|g| **g <= eps).count() as f64 / tail.len() as f64
    }
}

/// Deterministic play `a_t = g(c_t)`; the forecaster observes `a_t` itself.
pub fn run_continuous_dynamic(game: &ContinuousGame, config: &ContinuousConfig) -> Result<ContinuousRun> {
    let domain = game.domain();
    let n = game.players();
    let net = maximal_net_default(&domain, config.reply_net_radius)?;
    let part = PartitionOfUnity::new(net);
    let players: Vec<ContinuousPlayer> = (0..n).map(|i| game.player(i, config.argmax_steps)).collect();
    let mut warnings = Vec::new();
    for (i, p) in players.iter().enumerate() {
        let bad = part.net().centers.iter().filter(|z| !p.reply_set_is_interval(z, config.concavity_eps)).count();
        if bad > 0 {
            warnings.push(format!("player {i}: best-reply set not an interval at {bad} probes; guarantee void"));
        }
    }
    let replies: Vec<SmoothBestReply> =
        players.iter().map(|p| SmoothBestReply::with_partition(p, part.clone())).collect();
    let mut fc = WeakForecaster::from_settings(config.forecaster.clone())?;
    let mut run = ContinuousRun {
        forecasts: Vec::with_capacity(config.periods),
        actions: Vec::with_capacity(config.periods),
        pne_gaps: Vec::with_capacity(config.periods),
        warnings,
        solver: SolverStats::default(),
    };
    let mut scratch = Vec::new();
    for t in 0..config.periods {
        let c = fc.forecast().map_err(|e| e.at(t + 1))?.c;
        let mut a = vec![0.0; n];
        for g in &replies {
            let b = g.block();
            g.eval_into(&c, &mut scratch, &mut a[b]);
        }
        domain.project_in_place(&mut a);
        fc.observe(&c, &a).map_err(|e| e.at(t + 1))?;
        run.pne_gaps.push(game.pne_gap(&a, config.argmax_steps));
        run.forecasts.push(c);
        run.actions.push(a);
    }
    run.solver = fc.stats().clone();
    Ok(run)
}
