use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::dist;

type WeightFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A weight function `w: C → [0, 1]` with a Lipschitz bound.
#[derive(Clone)]
pub struct WeightFunction {
    name: String,
    lipschitz: f64,
    f: Arc<WeightFn>,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction")
            .field("name", &self.name)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl WeightFunction {
    pub fn new<F>(name: impl Into<String>, lipschitz: f64, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self { name: name.into(), lipschitz, f: Arc::new(f) }
    }

    pub fn constant(v: f64) -> Self {
        Self::new(format!("constant({v})"), 0.0, move |_| v)
    }

    /// `w(x) = x_j`, valid on domains inside the unit cube.
    pub fn coordinate(j: usize) -> Self {
        Self::new(format!("coordinate({j})"), 1.0, move |x| x[j])
    }

    /// `[1 − ||x − center|| / radius]_+`.
    pub fn tent(center: Vec<f64>, radius: f64) -> Self {
        let name = format!("tent({center:?}, {radius})");
        Self::new(name, 1.0 / radius, move |x| (1.0 - dist(x, &center) / radius).max(0.0))
    }

    /// Indicator of `{x : x_j > threshold}` (not Lipschitz).
    pub fn half_space(j: usize, threshold: f64) -> Self {
        let name = format!("half_space({j}, {threshold})");
        Self::new(name, f64::INFINITY, move |x| if x[j] > threshold { 1.0 } else { 0.0 })
    }

    /// Random piecewise-linear function on `[lo, hi]` with `knots` equal
    /// pieces and slopes bounded by `lipschitz`.
    pub fn random_piecewise_linear(lo: f64, hi: f64, lipschitz: f64, knots: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let knots = knots.max(1);
        let h = (hi - lo) / knots as f64;
        let mut values = Vec::with_capacity(knots + 1);
        let mut v: f64 = rng.gen();
        values.push(v);
        for _ in 0..knots {
            let step = lipschitz * h * rng.gen_range(-1.0..=1.0);
            v = (v + step).clamp(0.0, 1.0);
            values.push(v);
        }
        let name = format!("piecewise_linear(seed={seed}, L={lipschitz})");
        Self::new(name, lipschitz, move |x| {
            let s = ((x[0] - lo) / h).clamp(0.0, knots as f64);
            let i = (s.floor() as usize).min(knots - 1);
            let f = s - i as f64;
            values[i] * (1.0 - f) + values[i + 1] * f
        })
    }

    /// Random clipped sum of `bumps` tents in dimension `m`, Lipschitz bound `lipschitz`.
    pub fn random_bumps(m: usize, lipschitz: f64, bumps: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bumps = bumps.max(1);
        let radius = 1.0 / lipschitz;
        let items: Vec<(Vec<f64>, f64)> = (0..bumps)
            .map(|_| ((0..m).map(|_| rng.gen::<f64>()).collect(), rng.gen::<f64>() / bumps as f64))
            .collect();
        let name = format!("bumps(seed={seed}, L={lipschitz})");
        Self::new(name, lipschitz, move |x| {
            let s: f64 = items.iter().map(|(c, h)| h * (1.0 - dist(x, c) / radius).max(0.0)).sum();
            s.clamp(0.0, 1.0)
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    /// Checks the range and the Lipschitz bound on all pairs of `probes`.
    pub fn check(&self, probes: &[Vec<f64>]) -> Result<()> {
        let vals: Vec<f64> = probes.iter().map(|p| self.eval(p)).collect();
        for &v in &vals {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::WeightOutOfRange { value: v });
            }
        }
        if self.lipschitz.is_finite() {
            for i in 0..probes.len() {
                for j in i + 1..probes.len() {
                    let d = dist(&probes[i], &probes[j]);
                    if (vals[i] - vals[j]).abs() > self.lipschitz * d * (1.0 + 1e-9) + 1e-12 {
                        return Err(Error::BoundViolation(format!(
                            "{} exceeds Lipschitz bound {}",
                            self.name, self.lipschitz
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
