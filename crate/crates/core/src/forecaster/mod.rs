//! The deterministic finite-recall weakly calibrated forecaster.
//!
//! Each period builds `H_t` from the recall window, solves `b = H_t(b)`,
//! projects onto `C` and snaps to the forecast grid. The forecast is a
//! function of the window alone.

mod config;
mod hmap;
mod solver;
mod window;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use config::{
    theory_constants, ActionSet, DerivedConstants, ForecasterConfig, ForecasterSettings, Profile, SolverOptions,
    TheoryConstants,
};
pub use hmap::{eval_h, HMap};
pub use solver::{solve_fixed_point, FixedPoint, SolverStage};
pub use window::{RecallWindow, WindowEntry};

use crate::error::{check_dim, Error, Result};

/// One period's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    /// Grid forecast in the caller's coordinates.
    pub c: Vec<f64>,
    /// Fixed point in normalized coordinates.
    pub b: Vec<f64>,
    pub residual: f64,
    pub stage: SolverStage,
}

/// Solves the period's fixed point.
pub fn fixed_point(config: &ForecasterConfig, window: &RecallWindow) -> Result<FixedPoint> {
    let mut hmap = HMap::new(config, window);
    if hmap.is_zero() {
        let m = config.dim();
        return Ok(FixedPoint { b: vec![0.0; m], residual: 0.0, stage: SolverStage::Damped, evaluations: 1 });
    }
    let mut h = |b: &[f64], out: &mut [f64]| hmap.eval_into(b, out);
    solve_fixed_point(&mut h, &config.domain, config.derived().k_bound, &config.settings().solver)
}

/// `c_t = snap(γ(b_t))`.
pub fn next_forecast(config: &ForecasterConfig, window: &RecallWindow) -> Result<Forecast> {
    let fp = fixed_point(config, window)?;
    let mut c = fp.b.clone();
    config.domain.project_in_place(&mut c);
    config.grid.snap_in_place(&mut c);
    Ok(Forecast { c: config.normalization.backward(&c), b: fp.b, residual: fp.residual, stage: fp.stage })
}

/// Appends `(F(c_t), a_t)` to the window, evicting the oldest pair at capacity.
pub fn observe(config: &ForecasterConfig, window: &mut RecallWindow, c: &[f64], a: &[f64]) -> Result<()> {
    let s = config.settings();
    check_dim(config.dim(), c.len())?;
    check_dim(config.dim(), a.len())?;
    if !s.actions.contains(&s.domain, a) {
        return Err(Error::ActionOutsideSet);
    }
    if !s.domain.contains(c, 1e-12) {
        return Err(Error::OutsideDomain);
    }
    let cn = config.normalization.forward(c);
    let an = config.normalization.forward(a);
    let x = config.basis.eval(&cn)?;
    window.push(WindowEntry { c: cn, x, a: an, id: 0 });
    Ok(())
}

/// Solver outcome counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub periods: usize,
    /// Periods whose residual met the fine tolerance.
    pub fine: usize,
    pub max_residual: f64,
    pub stages: BTreeMap<String, usize>,
}

impl SolverStats {
    fn record(&mut self, f: &Forecast, tol: f64) {
        self.periods += 1;
        if f.residual <= tol {
            self.fine += 1;
        }
        self.max_residual = self.max_residual.max(f.residual);
        let key = serde_plain_stage(f.stage);
        *self.stages.entry(key).or_insert(0) += 1;
    }

    pub fn merge(&mut self, other: &SolverStats) {
        self.periods += other.periods;
        self.fine += other.fine;
        self.max_residual = self.max_residual.max(other.max_residual);
        for (k, v) in &other.stages {
            *self.stages.entry(k.clone()).or_insert(0) += v;
        }
    }
}

fn serde_plain_stage(s: SolverStage) -> String {
    match s {
        SolverStage::Damped => "damped",
        SolverStage::Newton => "newton",
        SolverStage::SlowDamped => "slow_damped",
        SolverStage::Bisection => "bisection",
        SolverStage::LatticeSearch => "lattice_search",
        SolverStage::Coarse => "coarse",
    }
    .to_string()
}

/// Saved forecaster state: settings, their fingerprint and the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecasterState {
    pub fingerprint: u64,
    pub settings: ForecasterSettings,
    pub window: RecallWindow,
}

/// A forecaster instance: shared configuration plus its own window.
#[derive(Debug, Clone)]
pub struct WeakForecaster {
    config: Arc<ForecasterConfig>,
    window: RecallWindow,
    stats: SolverStats,
}

impl WeakForecaster {
    pub fn new(config: Arc<ForecasterConfig>) -> Self {
        let window = RecallWindow::new(config.recall());
        Self { config, window, stats: SolverStats::default() }
    }

    pub fn from_settings(settings: ForecasterSettings) -> Result<Self> {
        Ok(Self::new(Arc::new(ForecasterConfig::build(settings)?)))
    }

    pub fn config(&self) -> &ForecasterConfig {
        &self.config
    }

    pub fn shared_config(&self) -> Arc<ForecasterConfig> {
        Arc::clone(&self.config)
    }

    pub fn window(&self) -> &RecallWindow {
        &self.window
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    /// The forecast for the current window, without recording statistics.
    pub fn peek(&self) -> Result<Forecast> {
        next_forecast(&self.config, &self.window)
    }

    pub fn forecast(&mut self) -> Result<Forecast> {
        let f = self.peek()?;
        self.stats.record(&f, self.config.settings().solver.tol);
        Ok(f)
    }

    pub fn observe(&mut self, c: &[f64], a: &[f64]) -> Result<()> {
        observe(&self.config, &mut self.window, c, a)
    }

    pub fn state(&self) -> ForecasterState {
        let settings = self.config.settings().clone();
        ForecasterState { fingerprint: settings.fingerprint(), settings, window: self.window.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.state()).expect("state serializes")
    }

    /// Rebuilds from saved state, rejecting a mismatched fingerprint.
    pub fn restore(state: ForecasterState) -> Result<Self> {
        if state.settings.fingerprint() != state.fingerprint {
            return Err(Error::InvalidParameter("forecaster state fingerprint mismatch".into()));
        }
        let mut f = Self::from_settings(state.settings)?;
        if state.window.capacity() != f.window.capacity() {
            return Err(Error::InvalidParameter("window capacity does not match recall".into()));
        }
        f.window = state.window;
        Ok(f)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let state: ForecasterState =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("bad forecaster state: {e}")))?;
        Self::restore(state)
    }
}
