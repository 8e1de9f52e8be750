use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use smoothcal::scores::{
    averaging_bound, gamma, indicator_sup_bound, smoothed_scores, weak_score, SmoothingKernel, Transcript,
    WeightFunction,
};

use crate::error::{setup, CliError, CliResult};
use crate::output::{finite, Check};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum KernelArg {
    Tent,
    Gaussian,
    Indicator,
}

pub fn kernel(k: KernelArg, delta: f64) -> CliResult<SmoothingKernel> {
    if k != KernelArg::Indicator && !(delta > 0.0) {
        return Err(CliError::spec(format!("kernel width must be positive, got {delta}")));
    }
    Ok(match k {
        KernelArg::Tent => SmoothingKernel::tent(delta),
        KernelArg::Gaussian => SmoothingKernel::gaussian(delta),
        KernelArg::Indicator => SmoothingKernel::Indicator,
    })
}

/// Repeats a single value `m` times; otherwise requires length `m`.
pub fn broadcast(name: &str, v: Vec<f64>, m: usize) -> CliResult<Vec<f64>> {
    match v.len() {
        1 => Ok(vec![v[0]; m]),
        n if n == m => Ok(v),
        n => Err(CliError::spec(format!("{name} has {n} entries, expected 1 or {m}"))),
    }
}

/// Constant, coordinate and seeded random Lipschitz weights on `[0,1]^m`.
pub fn test_weights(m: usize, random: usize, lipschitz: f64) -> Vec<WeightFunction> {
    let mut w = vec![WeightFunction::constant(1.0)];
    w.extend((0..m).map(WeightFunction::coordinate));
    for seed in 0..random as u64 {
        w.push(if m == 1 {
            WeightFunction::random_piecewise_linear(0.0, 1.0, lipschitz, 8, seed)
        } else {
            WeightFunction::random_bumps(m, lipschitz, 8, seed)
        });
    }
    w
}

/// Score family of a transcript and the inequalities tying it together.
pub fn score_block(t: &Transcript, kernel: SmoothingKernel, weights: &[WeightFunction]) -> CliResult<(Value, Vec<Check>)> {
    let m = t.dim();
    let (sup, k) = indicator_sup_bound(t).map_err(setup)?;
    let (k_smooth, k_tilde) = smoothed_scores(t, kernel).map_err(setup)?;
    let mut named = serde_json::Map::new();
    let mut max_weak: f64 = 0.0;
    for w in weights {
        let s = weak_score(t, w).map_err(setup)?;
        max_weak = max_weak.max(s);
        named.insert(w.name().to_string(), json!(s));
    }
    let alpha = t.domain().diameter();
    let forecasts: Vec<Vec<f64>> = t.iter().map(|(c, _)| c.to_vec()).collect();
    let residuals: Vec<Vec<f64>> = t.iter().map(|(c, a)| a.iter().zip(c).map(|(x, y)| x - y).collect()).collect();
    let mut checks = vec![Check::at_most("K_T <= 2m sup S_T^w (indicator weights)", k, 2.0 * m as f64 * sup)];
    let (lemma, smoothing) = if let SmoothingKernel::Indicator = kernel {
        checks.push(Check::holds("indicator kernel reproduces K_T exactly", k_smooth.to_bits() == k.to_bits()));
        (Value::Null, Value::Null)
    } else {
        let lemma = averaging_bound(&forecasts, &residuals, kernel, alpha).map_err(setup)?;
        let rhs = gamma(m, alpha) * kernel.lipschitz().powf(m as f64 / 2.0) * k.sqrt();
        checks.push(Check::at_most("K_T^smooth <= gamma L^(m/2) sqrt(K_T)", k_smooth, rhs * (1.0 + 1e-12)));
        checks.push(Check::at_most("averaging lemma lhs <= rhs", lemma.lhs, lemma.rhs * (1.0 + 1e-12)));
        (json!(lemma), json!({ "lhs": k_smooth, "rhs": finite(rhs) }))
    };
    let results = json!({
        "periods": t.len(),
        "K_T": k,
        "K_T_smooth": k_smooth,
        "K_T_action_only": k_tilde,
        "kernel": kernel,
        "weak_scores": named,
        "max_weak_score": max_weak,
        "indicator_sup": sup,
        "gamma": gamma(m, alpha),
        "smoothing_bound": smoothing,
        "averaging_lemma": lemma,
    });
    Ok((results, checks))
}
