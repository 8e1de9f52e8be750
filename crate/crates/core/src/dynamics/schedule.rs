use serde::{Deserialize, Serialize};

use crate::geometry::nu;
use crate::scores::gamma;

/// The parameter schedule of smooth calibrated learning for a target `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicSchedule {
    pub eps: f64,
    pub players: usize,
    pub m: usize,
    pub payoff_bound: f64,
    pub eps_g: f64,
    pub l_g: f64,
    pub eps4: f64,
    pub eps_c: f64,
    pub l_c: f64,
    pub eps2: f64,
    pub eps1: f64,
    /// `ε_c + ε_2 + 1/L_c + nL_g/L_c`.
    pub eps3: f64,
    /// `ε_g + √m U L_g ε_4`.
    pub eps5: f64,
    pub gamma_m: f64,
    pub nu_m: f64,
}

/// `ε_g = ε`, `L_g = ν_m(√m U/ε)^{m+1}`, `ε_4 = 2ε/(√m U L_g)`, `ε_c = ε_2 = εε_4`,
/// `L_c = (1 + nL_g)/(εε_4)`, `ε_1 = ε_2²/(γ_m² L_c^m (1 + √m L_c))`.
pub fn tune_dynamic_parameters(eps: f64, players: usize, m: usize, payoff_bound: f64) -> DynamicSchedule {
    let (mf, nf, u) = (m as f64, players as f64, payoff_bound);
    let sm = mf.sqrt();
    let nu_m = nu(m);
    let gamma_m = gamma(m, sm);
    let eps_g = eps;
    let l_g = nu_m * (sm * u / eps).powf(mf + 1.0);
    let eps4 = 2.0 * eps / (sm * u * l_g);
    let eps_c = eps * eps4;
    let l_c = (1.0 + nf * l_g) / (eps * eps4);
    let eps2 = eps * eps4;
    let eps1 = eps2 * eps2 / (gamma_m * gamma_m * l_c.powf(mf) * (1.0 + sm * l_c));
    let eps3 = eps_c + eps2 + 1.0 / l_c + nf * l_g / l_c;
    let eps5 = eps_g + sm * u * l_g * eps4;
    DynamicSchedule {
        eps,
        players,
        m,
        payoff_bound,
        eps_g,
        l_g,
        eps4,
        eps_c,
        l_c,
        eps2,
        eps1,
        eps3,
        eps5,
        gamma_m,
        nu_m,
    }
}

impl DynamicSchedule {
    /// Relative errors of `ε_5 = 3ε` and `ε_3 = 3εε_4`.
    pub fn identity_errors(&self) -> (f64, f64) {
        let e5 = 3.0 * self.eps;
        let e3 = 3.0 * self.eps * self.eps4;
        ((self.eps5 - e5).abs() / e5, (self.eps3 - e3).abs() / e3)
    }
}
