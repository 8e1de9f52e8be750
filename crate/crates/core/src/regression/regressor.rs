use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{add_outer, dot, min_eigenvalue_at_least, norm, Cholesky};

/// One `(x_t, y_t)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: Vec<f64>,
    pub y: f64,
}

impl Observation {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Self { x, y }
    }
}

/// Square loss `ψ_t(θ) = (y_t − θ'x_t)²`.
pub fn loss(theta: &[f64], obs: &Observation) -> f64 {
    let r = obs.y - dot(theta, &obs.x);
    r * r
}

/// Which member of the forward family to run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    Forward,
    Discounted { lambda: f64 },
    Windowed { lambda: f64, recall: usize },
}

impl Variant {
    pub fn lambda(&self) -> f64 {
        match self {
            Variant::Forward => 1.0,
            Variant::Discounted { lambda } | Variant::Windowed { lambda, .. } => *lambda,
        }
    }

    pub fn recall(&self) -> Option<usize> {
        match self {
            Variant::Windowed { recall, .. } => Some(*recall),
            _ => None,
        }
    }
}

/// How the windowed sums are kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowMaintenance {
    /// Rebuild `Z_t` and `v_t` from the stored window at every prediction.
    Recompute,
    /// Downdate running sums and rebuild them from the window every `refresh` updates.
    Incremental { refresh: usize },
}

/// Static description of a regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorParams {
    pub variant: Variant,
    /// Ridge coefficient `a`.
    pub ridge: f64,
    pub dim: usize,
    /// Bound `X` on `||x_t||`.
    pub x_bound: f64,
    /// Bound `Y` on `|y_t|`.
    pub y_bound: f64,
}

impl RegressorParams {
    pub fn new(variant: Variant, ridge: f64, dim: usize) -> Self {
        Self { variant, ridge, dim, x_bound: 1.0, y_bound: 1.0 }
    }

    pub fn with_bounds(mut self, x_bound: f64, y_bound: f64) -> Self {
        self.x_bound = x_bound;
        self.y_bound = y_bound;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ridge > 0.0) {
            return Err(Error::InvalidParameter(format!("ridge a = {} must be positive", self.ridge)));
        }
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        match self.variant {
            Variant::Forward => {}
            Variant::Discounted { lambda } | Variant::Windowed { lambda, .. } => {
                if !(lambda > 0.0 && lambda < 1.0) {
                    return Err(Error::InvalidParameter(format!("lambda = {lambda} outside (0,1)")));
                }
            }
        }
        if let Variant::Windowed { recall, .. } = self.variant {
            if recall == 0 {
                return Err(Error::InvalidParameter("recall R must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// Output of [`Regressor::predict`].
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub theta: Vec<f64>,
    pub y_hat: f64,
}

/// Forward, discounted and windowed online ridge regression.
///
/// With `P` the discounted Gram sum and `V` the discounted target sum of the
/// stored past, a prediction at `x_t` solves `(aI + λP + x_t x_t') θ = λV`
/// (with `λ = 1` for the plain forward algorithm).
#[derive(Debug, Clone)]
pub struct Regressor {
    params: RegressorParams,
    maintenance: WindowMaintenance,
    p: Vec<f64>,
    v: Vec<f64>,
    window: VecDeque<Observation>,
    powers: Vec<f64>,
    t: usize,
    since_refresh: usize,
    z: Vec<f64>,
    chol: Cholesky,
}

impl Regressor {
    pub fn new(params: RegressorParams) -> Result<Self> {
        Self::with_maintenance(params, WindowMaintenance::Recompute)
    }

    pub fn with_maintenance(params: RegressorParams, maintenance: WindowMaintenance) -> Result<Self> {
        params.validate()?;
        if let WindowMaintenance::Incremental { refresh } = maintenance {
            if refresh == 0 {
                return Err(Error::InvalidParameter("refresh interval must be >= 1".into()));
            }
        }
        let d = params.dim;
        let powers = match params.variant {
            Variant::Windowed { lambda, recall } => {
                let mut pw = Vec::with_capacity(recall);
                let mut acc = 1.0;
                for _ in 0..recall {
                    pw.push(acc);
                    acc *= lambda;
                }
                pw
            }
            _ => Vec::new(),
        };
        Ok(Self {
            params,
            maintenance,
            p: vec![0.0; d * d],
            v: vec![0.0; d],
            window: VecDeque::new(),
            powers,
            t: 0,
            since_refresh: 0,
            z: vec![0.0; d * d],
            chol: Cholesky::factor(&identity(d), d).expect("identity is positive definite"),
        })
    }

    pub fn params(&self) -> &RegressorParams {
        &self.params
    }

    /// Number of observations absorbed so far.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Stored window, oldest first (windowed variant only).
    pub fn window(&self) -> &VecDeque<Observation> {
        &self.window
    }

    fn capacity(&self) -> usize {
        self.params.variant.recall().map_or(0, |r| r - 1)
    }

    fn recompute_each_step(&self) -> bool {
        matches!(self.params.variant, Variant::Windowed { .. }) && self.maintenance == WindowMaintenance::Recompute
    }

    /// Discounted sums of the stored past, weighted `λ^{age}` with age 1 for the newest.
    fn past_sums(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.params.dim;
        let lambda = self.params.variant.lambda();
        if self.recompute_each_step() {
            let mut p = vec![0.0; d * d];
            let mut v = vec![0.0; d];
            let n = self.window.len();
            for (i, obs) in self.window.iter().enumerate() {
                let w = self.powers[n - i];
                add_outer(&mut p, &obs.x, w);
                for (vj, xj) in v.iter_mut().zip(&obs.x) {
                    *vj += w * obs.y * xj;
                }
            }
            (p, v)
        } else {
            (
                self.p.iter().map(|x| lambda * x).collect(),
                self.v.iter().map(|x| lambda * x).collect(),
            )
        }
    }

    /// `Z_t` for a query point `x_t`.
    pub fn gram(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.params.dim, x.len())?;
        let d = self.params.dim;
        let (mut z, _) = self.past_sums();
        for i in 0..d {
            z[i * d + i] += self.params.ridge;
        }
        add_outer(&mut z, x, 1.0);
        Ok(z)
    }

    /// `v_t`, which uses targets strictly before `t`.
    pub fn target_sum(&self) -> Vec<f64> {
        self.past_sums().1
    }

    /// `θ_t = Z_t^{-1} v_t` and `ŷ_t = θ_t' x_t`.
    pub fn predict(&mut self, x: &[f64]) -> Result<Prediction> {
        check_dim(self.params.dim, x.len())?;
        let d = self.params.dim;
        let mut theta = if self.recompute_each_step() {
            let (p, v) = self.past_sums();
            self.z.copy_from_slice(&p);
            v
        } else {
            let lambda = self.params.variant.lambda();
            for (z, p) in self.z.iter_mut().zip(&self.p) {
                *z = lambda * p;
            }
            self.v.iter().map(|v| lambda * v).collect()
        };
        for i in 0..d {
            self.z[i * d + i] += self.params.ridge;
        }
        add_outer(&mut self.z, x, 1.0);
        if !self.chol.refactor(&self.z) {
            return Err(Error::InvalidParameter("Gram matrix lost positive definiteness".into()));
        }
        self.chol.solve_in_place(&mut theta);
        let y_hat = dot(&theta, x);
        Ok(Prediction { theta, y_hat })
    }

    /// Whether the last factored `Z_t` has every eigenvalue at least `a`.
    pub fn last_gram_is_bounded_below(&self) -> bool {
        min_eigenvalue_at_least(&self.z, self.params.dim, self.params.ridge)
    }

    fn check_bounds(&self, obs: &Observation) -> Result<()> {
        check_dim(self.params.dim, obs.x.len())?;
        let nx = norm(&obs.x);
        if !(nx <= self.params.x_bound * (1.0 + 1e-12)) {
            return Err(Error::BoundViolation(format!("||x|| = {nx} > X = {}", self.params.x_bound)));
        }
        if !(obs.y.abs() <= self.params.y_bound * (1.0 + 1e-12)) {
            return Err(Error::BoundViolation(format!("|y| = {} > Y = {}", obs.y.abs(), self.params.y_bound)));
        }
        Ok(())
    }

    /// Absorbs `(x_t, y_t)`.
    pub fn update(&mut self, obs: Observation) -> Result<()> {
        self.check_bounds(&obs)?;
        self.t += 1;
        match self.params.variant {
            Variant::Forward => self.accumulate(&obs, 1.0),
            Variant::Discounted { lambda } => self.accumulate(&obs, lambda),
            Variant::Windowed { lambda, .. } => {
                let cap = self.capacity();
                if cap == 0 {
                    return Ok(());
                }
                let evicted = if self.window.len() == cap { self.window.pop_front() } else { None };
                if let WindowMaintenance::Incremental { refresh } = self.maintenance {
                    self.accumulate(&obs, lambda);
                    if let Some(old) = &evicted {
                        let w = self.powers[cap];
                        add_outer(&mut self.p, &old.x, -w);
                        for (vj, xj) in self.v.iter_mut().zip(&old.x) {
                            *vj -= w * old.y * xj;
                        }
                    }
                    self.window.push_back(obs);
                    self.since_refresh += 1;
                    if self.since_refresh >= refresh {
                        self.refresh();
                    }
                } else {
                    self.window.push_back(obs);
                }
            }
        }
        Ok(())
    }

    fn accumulate(&mut self, obs: &Observation, lambda: f64) {
        if lambda != 1.0 {
            self.p.iter_mut().for_each(|x| *x *= lambda);
            self.v.iter_mut().for_each(|x| *x *= lambda);
        }
        add_outer(&mut self.p, &obs.x, 1.0);
        if obs.y != 0.0 {
            for (vj, xj) in self.v.iter_mut().zip(&obs.x) {
                *vj += obs.y * xj;
            }
        }
    }

    /// Rebuilds the running windowed sums from the stored window.
    fn refresh(&mut self) {
        self.since_refresh = 0;
        let d = self.params.dim;
        let mut p = vec![0.0; d * d];
        let mut v = vec![0.0; d];
        let n = self.window.len();
        for (i, obs) in self.window.iter().enumerate() {
            let w = self.powers[n - 1 - i];
            add_outer(&mut p, &obs.x, w);
            for (vj, xj) in v.iter_mut().zip(&obs.x) {
                *vj += w * obs.y * xj;
            }
        }
        self.p = p;
        self.v = v;
    }
}

fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}
