//! The calibration game between a forecaster (C-player) and an adversary (A-player).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecaster::{ActionSet, Forecast, SolverStats, WeakForecaster};
use crate::geometry::{lex_cmp, ConvexDomain};
use crate::linalg::{dist, norm};
use crate::rng::CounterRng;
use crate::scores::{Transcript, WeightFunction};

/// A pure strategy of the C-player.
#[derive(Debug, Clone)]
pub enum Forecaster {
    WeakCalibrated(Box<WeakForecaster>),
    /// `first` on odd periods, `second` on even ones.
    Alternating { domain: ConvexDomain, first: Vec<f64>, second: Vec<f64>, t: usize },
    Constant { domain: ConvexDomain, c: Vec<f64> },
}

impl Forecaster {
    pub fn weak(f: WeakForecaster) -> Self {
        Forecaster::WeakCalibrated(Box::new(f))
    }

    pub fn alternating(domain: ConvexDomain, first: Vec<f64>, second: Vec<f64>) -> Self {
        Forecaster::Alternating { domain, first, second, t: 0 }
    }

    pub fn constant(domain: ConvexDomain, c: Vec<f64>) -> Self {
        Forecaster::Constant { domain, c }
    }

    pub fn domain(&self) -> &ConvexDomain {
        match self {
            Forecaster::WeakCalibrated(f) => &f.config().settings().domain,
            Forecaster::Alternating { domain, .. } | Forecaster::Constant { domain, .. } => domain,
        }
    }

    /// Next forecast; only the weak forecaster records solver statistics.
    pub fn forecast(&mut self) -> Result<Forecast> {
        match self {
            Forecaster::WeakCalibrated(f) => f.forecast(),
            _ => self.peek(),
        }
    }

    pub fn peek(&self) -> Result<Forecast> {
        let plain = |c: &Vec<f64>| Forecast {
            c: c.clone(),
            b: c.clone(),
            residual: 0.0,
            stage: crate::forecaster::SolverStage::Damped,
        };
        match self {
            Forecaster::WeakCalibrated(f) => f.peek(),
            Forecaster::Alternating { first, second, t, .. } => Ok(plain(if *t % 2 == 0 { first } else { second })),
            Forecaster::Constant { c, .. } => Ok(plain(c)),
        }
    }

    pub fn observe(&mut self, c: &[f64], a: &[f64]) -> Result<()> {
        match self {
            Forecaster::WeakCalibrated(f) => f.observe(c, a),
            Forecaster::Alternating { t, .. } => {
                *t += 1;
                Ok(())
            }
            Forecaster::Constant { .. } => Ok(()),
        }
    }

    pub fn stats(&self) -> Option<&SolverStats> {
        match self {
            Forecaster::WeakCalibrated(f) => Some(f.stats()),
            _ => None,
        }
    }
}

/// Whether the adversary sees `c_t` before acting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Standard,
    Leaky,
}

type MapFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A reaction function `g: C → A`.
#[derive(Clone)]
pub struct ReactionMap {
    name: String,
    f: Arc<MapFn>,
}

impl fmt::Debug for ReactionMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ReactionMap({})", self.name)
    }
}

impl ReactionMap {
    pub fn new<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self { name: name.into(), f: Arc::new(f) }
    }

    pub fn identity() -> Self {
        Self::new("identity", |c| c.to_vec())
    }

    pub fn constant(a: Vec<f64>) -> Self {
        Self::new(format!("constant({a:?})"), move |_| a.clone())
    }

    /// `c ↦ 1 − c` coordinatewise.
    pub fn flip() -> Self {
        Self::new("flip", |c| c.iter().map(|v| 1.0 - v).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, c: &[f64]) -> Vec<f64> {
        (self.f)(c)
    }
}

/// Strategy of the A-player.
#[derive(Debug, Clone)]
pub enum AdversaryKind {
    /// `a_j = 1` iff `c_j < cut`, else `0`.
    Threshold { cut: f64 },
    Constant { a: Vec<f64> },
    /// Uniform over the finite action set (or the domain's vertices), keyed by `(seed ^ salt, t)`.
    SeededRandom { salt: u64 },
    Reaction { g: ReactionMap },
    /// Picks the action that maximizes the largest running weighted residual
    /// `||Σ_s w(c_s)(a_s − c_s)||` over `targets`, lexicographically first on ties.
    SimulatingBestResponse { targets: Vec<WeightFunction> },
}

impl AdversaryKind {
    pub fn name(&self) -> String {
        match self {
            AdversaryKind::Threshold { cut } => format!("threshold({cut})"),
            AdversaryKind::Constant { a } => format!("constant({a:?})"),
            AdversaryKind::SeededRandom { salt } => format!("seeded_random({salt})"),
            AdversaryKind::Reaction { g } => format!("reaction({})", g.name()),
            AdversaryKind::SimulatingBestResponse { targets } => format!("simulating_best_response({})", targets.len()),
        }
    }

    fn needs_forecast(&self) -> bool {
        !matches!(self, AdversaryKind::Constant { .. } | AdversaryKind::SeededRandom { .. })
    }
}

#[derive(Debug, Clone)]
pub struct Adversary {
    pub kind: AdversaryKind,
    pub mode: Mode,
}

impl Adversary {
    pub fn new(kind: AdversaryKind, mode: Mode) -> Self {
        Self { kind, mode }
    }

    pub fn leaky(kind: AdversaryKind) -> Self {
        Self::new(kind, Mode::Leaky)
    }

    pub fn standard(kind: AdversaryKind) -> Self {
        Self::new(kind, Mode::Standard)
    }
}

struct AdversaryState {
    kind: AdversaryKind,
    rng: CounterRng,
    candidates: Vec<Vec<f64>>,
    sums: Vec<Vec<f64>>,
}

impl AdversaryState {
    fn act(&mut self, t: usize, c: &[f64]) -> Vec<f64> {
        match &self.kind {
            AdversaryKind::Threshold { cut } => c.iter().map(|v| if *v < *cut { 1.0 } else { 0.0 }).collect(),
            AdversaryKind::Constant { a } => a.clone(),
            AdversaryKind::SeededRandom { .. } => {
                let n = self.candidates.len();
                let i = ((self.rng.uniform(t as u64, 0) * n as f64) as usize).min(n - 1);
                self.candidates[i].clone()
            }
            AdversaryKind::Reaction { g } => g.eval(c),
            AdversaryKind::SimulatingBestResponse { targets } => {
                let wc: Vec<f64> = targets.iter().map(|w| w.eval(c)).collect();
                let mut best: Option<(f64, usize)> = None;
                let mut tmp = vec![0.0; c.len()];
                for (ai, a) in self.candidates.iter().enumerate() {
                    let mut score: f64 = 0.0;
                    for (s, w) in self.sums.iter().zip(&wc) {
                        for j in 0..c.len() {
                            tmp[j] = s[j] + w * (a[j] - c[j]);
                        }
                        score = score.max(norm(&tmp));
                    }
                    if best.map_or(true, |(b, _)| score > b) {
                        best = Some((score, ai));
                    }
                }
                let a = self.candidates[best.map_or(0, |b| b.1)].clone();
                for (s, w) in self.sums.iter_mut().zip(&wc) {
                    for j in 0..c.len() {
                        s[j] += w * (a[j] - c[j]);
                    }
                }
                a
            }
        }
    }
}

/// Transcript plus solver statistics of one game.
#[derive(Debug, Clone)]
pub struct GameRun {
    pub transcript: Transcript,
    pub stats: Option<SolverStats>,
    pub residuals: Vec<f64>,
}

/// Plays `periods` rounds. In standard mode an adversary that needs `c_t`
/// obtains it by running its own copy of the (deterministic) forecaster.
pub fn play(forecaster: &Forecaster, adversary: &Adversary, actions: &ActionSet, periods: usize, seed: u64) -> Result<GameRun> {
    if periods == 0 {
        return Err(Error::InvalidParameter("T must be >= 1".into()));
    }
    let domain = forecaster.domain().clone();
    let mut candidates = match actions {
        ActionSet::Finite { points } => points.clone(),
        ActionSet::Domain => domain.vertices(),
    };
    candidates.sort_by(|a, b| lex_cmp(a, b));
    let salt = match adversary.kind {
        AdversaryKind::SeededRandom { salt } => salt,
        _ => 0,
    };
    let targets = match &adversary.kind {
        AdversaryKind::SimulatingBestResponse { targets } => targets.len(),
        _ => 0,
    };
    let mut state = AdversaryState {
        kind: adversary.kind.clone(),
        rng: CounterRng::new(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
        candidates,
        sums: vec![vec![0.0; domain.dim()]; targets],
    };
    let mut fc = forecaster.clone();
    let mut simulator = (adversary.mode == Mode::Standard && adversary.kind.needs_forecast()).then(|| forecaster.clone());
    let mut transcript = Transcript::new(domain.clone());
    let mut residuals = Vec::with_capacity(periods);
    for t in 0..periods {
        let a = match simulator.as_mut() {
            Some(sim) => {
                let c_sim = sim.peek().map_err(|e| e.at(t + 1))?.c;
                state.act(t, &c_sim)
            }
            None => Vec::new(),
        };
        let f = fc.forecast().map_err(|e| e.at(t + 1))?;
        let a = if simulator.is_some() { a } else { state.act(t, &f.c) };
        if !actions.contains(&domain, &a) {
            return Err(Error::ActionOutsideSet.at(t + 1));
        }
        fc.observe(&f.c, &a).map_err(|e| e.at(t + 1))?;
        if let Some(sim) = simulator.as_mut() {
            sim.observe(&f.c, &a).map_err(|e| e.at(t + 1))?;
        }
        residuals.push(f.residual);
        transcript.push(&f.c, &a).map_err(|e| e.at(t + 1))?;
    }
    Ok(GameRun { transcript, stats: fc.stats().cloned(), residuals })
}

/// Fraction of periods with `||g(c_t) − c_t|| ≤ tol`.
pub fn fixed_point_fraction(t: &Transcript, g: &dyn Fn(&[f64]) -> Vec<f64>, tol: f64) -> f64 {
    if t.is_empty() {
        return 0.0;
    }
    let hits = t.iter().filter(|(c, _)| dist(&g(c), c) <= tol).count();
    hits as f64 / t.len() as f64
}
