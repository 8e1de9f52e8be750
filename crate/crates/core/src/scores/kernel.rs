use serde::{Deserialize, Serialize};

use crate::linalg::dist;

/// Smoothing function `Λ(c', c) ∈ [0, 1]` with `Λ(c, c) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothingKernel {
    /// `1` iff `c' = c` (bitwise).
    Indicator,
    /// `[1 − ||c' − c|| / δ]_+`.
    Tent { delta: f64 },
    /// `exp(−||c' − c||² / (2σ²))`.
    Gaussian { sigma: f64 },
}

impl SmoothingKernel {
    pub fn tent(delta: f64) -> Self {
        SmoothingKernel::Tent { delta }
    }

    pub fn gaussian(sigma: f64) -> Self {
        SmoothingKernel::Gaussian { sigma }
    }

    pub fn eval(&self, c_prime: &[f64], c: &[f64]) -> f64 {
        match *self {
            SmoothingKernel::Indicator => {
                if c_prime.iter().zip(c).all(|(x, y)| x.to_bits() == y.to_bits()) {
                    1.0
                } else {
                    0.0
                }
            }
            SmoothingKernel::Tent { delta } => (1.0 - dist(c_prime, c) / delta).max(0.0),
            SmoothingKernel::Gaussian { sigma } => {
                let r = dist(c_prime, c);
                (-(r * r) / (2.0 * sigma * sigma)).exp()
            }
        }
    }

    /// Lipschitz bound in the first argument; infinite for the indicator.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            SmoothingKernel::Indicator => f64::INFINITY,
            SmoothingKernel::Tent { delta } => 1.0 / delta,
            SmoothingKernel::Gaussian { sigma } => (-0.5f64).exp() / sigma,
        }
    }

    /// Radius outside which the kernel vanishes, if finite.
    pub fn support_radius(&self) -> Option<f64> {
        match *self {
            SmoothingKernel::Indicator => Some(0.0),
            SmoothingKernel::Tent { delta } => Some(delta),
            SmoothingKernel::Gaussian { .. } => None,
        }
    }
}
