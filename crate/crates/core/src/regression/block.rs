use super::regressor::Observation;
use crate::error::{Error, Result};

/// Expands each observation `t` into a block of `d + 1` observations
/// `(λ^{−t/2} b e_i, 0)` for `i = 1..d` followed by `(λ^{−t/2} x_t, λ^{−t/2} y_t)`,
/// with `b = √(a(1−λ))`. The plain forward algorithm on the result
/// reproduces the discounted `θ_t` at every block end.
pub fn block_expand(data: &[Observation], a: f64, lambda: f64) -> Result<Vec<Observation>> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} outside (0,1)")));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("ridge a = {a} must be positive")));
    }
    let b = (a * (1.0 - lambda)).sqrt();
    let ln_inv = -lambda.ln();
    let mut out = Vec::with_capacity(data.len() * (data.first().map_or(0, |o| o.x.len()) + 1));
    for (i, obs) in data.iter().enumerate() {
        let t = (i + 1) as f64;
        if t * ln_inv > 700.0 {
            return Err(Error::Overflow(format!("lambda^(-t) overflows at t = {}", i + 1)));
        }
        let s = (0.5 * t * ln_inv).exp();
        let d = obs.x.len();
        for j in 0..d {
            let mut x = vec![0.0; d];
            x[j] = s * b;
            out.push(Observation::new(x, 0.0));
        }
        out.push(Observation::new(obs.x.iter().map(|v| s * v).collect(), s * obs.y));
    }
    Ok(out)
}
