use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use super::regressor::Observation;

/// Synthetic sequences with `||x|| ≤ 1` and `|y| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    /// `x` uniform in the unit ball, `y` uniform in `[−1, 1]`.
    Random,
    /// `y = θ*'x + noise`, clipped to `[−1, 1]`.
    Linear,
    /// `x = e_1`, `y` alternating `+1, −1`.
    SignFlip,
    /// `x` random, `y = −sign(ŷ_t)`: always opposes the current prediction.
    Adversarial,
}

impl std::str::FromStr for DataKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random" => Ok(DataKind::Random),
            "linear" => Ok(DataKind::Linear),
            "sign_flip" => Ok(DataKind::SignFlip),
            "adversarial" => Ok(DataKind::Adversarial),
            other => Err(format!("unknown data kind '{other}'")),
        }
    }
}

/// Generates observation `t` (1-based); `y_hat` is the learner's prediction
/// at `x_t`, consulted only by the adversarial kind.
#[derive(Debug, Clone)]
pub struct DataGenerator {
    kind: DataKind,
    dim: usize,
    seed: u64,
    truth: Vec<f64>,
}

impl DataGenerator {
    pub fn new(kind: DataKind, dim: usize, seed: u64) -> Self {
        let mut r = keyed(seed, u64::MAX, 0);
        let truth = (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect();
        Self { kind, dim, seed, truth }
    }

    pub fn kind(&self) -> DataKind {
        self.kind
    }

    /// Feature vector of period `t`.
    pub fn features(&self, t: u64) -> Vec<f64> {
        match self.kind {
            DataKind::SignFlip => {
                let mut x = vec![0.0; self.dim];
                x[0] = 1.0;
                x
            }
            _ => {
                let mut r = keyed(self.seed, t, 0);
                let mut x: Vec<f64> = (0..self.dim).map(|_| r.gen_range(-1.0..1.0)).collect();
                let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let radius: f64 = r.gen::<f64>().powf(1.0 / self.dim as f64);
                if n > 0.0 {
                    x.iter_mut().for_each(|v| *v *= radius / n);
                }
                x
            }
        }
    }

    /// Target of period `t` given the features and the learner's prediction.
    pub fn target(&self, t: u64, x: &[f64], y_hat: f64) -> f64 {
        match self.kind {
            DataKind::Random => keyed(self.seed, t, 1).gen::<f64>() * 2.0 - 1.0,
            DataKind::Linear => {
                let clean: f64 = self.truth.iter().zip(x).map(|(a, b)| a * b).sum();
                let noise = 0.2 * (keyed(self.seed, t, 1).gen::<f64>() * 2.0 - 1.0);
                (clean + noise).clamp(-1.0, 1.0)
            }
            DataKind::SignFlip => {
                if t % 2 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            DataKind::Adversarial => {
                if y_hat > 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }

    pub fn observation(&self, t: u64, y_hat: f64) -> Observation {
        let x = self.features(t);
        let y = self.target(t, &x, y_hat);
        Observation::new(x, y)
    }
}

/// Generator keyed by `(seed, t, lane)`; seeding runs SplitMix64 over the key.
fn keyed(seed: u64, t: u64, lane: u64) -> Xoshiro256PlusPlus {
    let key = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ t.wrapping_mul(0xbf58_476d_1ce4_e5b9).rotate_left(17) ^ lane;
    Xoshiro256PlusPlus::seed_from_u64(key)
}
