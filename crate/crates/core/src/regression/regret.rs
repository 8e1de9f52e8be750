use std::collections::VecDeque;

use serde::Serialize;

use super::regressor::{loss, Observation, Regressor, RegressorParams, WindowMaintenance};
use crate::error::{Error, Result};
use crate::linalg::dot;

/// Averaged regret against fixed reference vectors at the final period.
#[derive(Debug, Clone, Serialize)]
pub struct RegretReport {
    pub thetas: Vec<Vec<f64>>,
    /// `(1/R) Σ_{t=T−R+1}^{T} [ψ_t(θ_t) − ψ_t(θ)]`.
    pub windowed_avg: Vec<f64>,
    /// `(1/T) Σ_{t=1}^{T} [ψ_t(θ_t) − ψ_t(θ)]`.
    pub cumulative_avg: Vec<f64>,
    /// `ε (1 + ||θ||²)`.
    pub bound_rhs: Vec<f64>,
    pub window: usize,
    pub periods: usize,
    /// Periods `T ≥ R` at which some bound failed (windowed, cumulative).
    pub violations: (usize, usize),
    /// Largest `average − bound` over the fully evaluated periods (windowed, cumulative).
    pub max_excess: (f64, f64),
    /// Periods `T ≥ R` evaluated in full; the rest were certified by the slack bound.
    pub checked: usize,
}

/// Moments `(alg, Σy², Σy x, upper triangle of Σx x')`; the regret against
/// any reference `θ` is linear in them.
#[derive(Debug, Clone)]
struct LossSums {
    m: Vec<f64>,
}

impl LossSums {
    fn new(d: usize) -> Self {
        Self { m: vec![0.0; moment_len(d)] }
    }

    fn add(&mut self, x: &[f64], y: f64, alg: f64, sign: f64) {
        let d = x.len();
        self.m[0] += sign * alg;
        self.m[1] += sign * y * y;
        let mut k = 2;
        for xi in x {
            self.m[k] += sign * y * xi;
            k += 1;
        }
        for i in 0..d {
            let sx = sign * x[i];
            for xj in &x[i..] {
                self.m[k] += sx * xj;
                k += 1;
            }
        }
    }

    /// `out[θ] = regret(θ)` from coefficients stored moment-major.
    fn regrets(&self, coefs: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let n = out.len();
        for (k, mk) in self.m.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(&coefs[k * n..(k + 1) * n]) {
                *o += c * mk;
            }
        }
    }
}

fn moment_len(d: usize) -> usize {
    2 + d + d * (d + 1) / 2
}

fn transpose_rows(rows: Vec<Vec<f64>>, k: usize) -> Vec<f64> {
    let n = rows.len();
    let mut out = vec![0.0; k * n];
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j * n + i] = *v;
        }
    }
    out
}

/// Row `c` with `regret(θ) = c · moments`.
fn regret_coefficients(theta: &[f64]) -> Vec<f64> {
    let d = theta.len();
    let mut c = Vec::with_capacity(moment_len(d));
    c.push(1.0);
    c.push(-1.0);
    c.extend(theta.iter().map(|t| 2.0 * t));
    for i in 0..d {
        for j in i..d {
            let f = if i == j { 1.0 } else { 2.0 };
            c.push(-f * theta[i] * theta[j]);
        }
    }
    c
}

/// Tracks windowed and cumulative average regret for a set of reference
/// vectors and checks `average ≤ ε(1 + ||θ||²)` at every `T ≥ R`.
///
/// A period is evaluated in full only when the slack left at the last full
/// evaluation could have been used up: with nonnegative losses every term
/// `ψ_s(θ_s) − ψ_s(θ)` is bounded by `ψ_s(θ_s) + (|y_s| + max||θ|| ||x_s||)²`,
/// which bounds how far any average can move per period.
#[derive(Debug, Clone)]
pub struct RegretTracker {
    thetas: Vec<Vec<f64>>,
    /// Regret coefficients, moment-major: entry `k·n + θ`.
    coefs: Vec<f64>,
    scratch: (Vec<f64>, Vec<f64>),
    row: Vec<f64>,
    rhs: Vec<f64>,
    dim: usize,
    window: usize,
    /// Rows `(x, y, loss)` of the current window, oldest first.
    ring: VecDeque<f64>,
    win: LossSums,
    cum: LossSums,
    t: usize,
    since_refresh: usize,
    violations: (usize, usize),
    max_excess: (f64, f64),
    theta_max: f64,
    term_max: f64,
    slack: (f64, f64),
    drift: (f64, f64),
    checked: usize,
}

impl RegretTracker {
    pub fn new(dim: usize, window: usize, thetas: Vec<Vec<f64>>, eps: f64) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidParameter("window must be >= 1".into()));
        }
        if let Some(th) = thetas.iter().find(|th| th.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: th.len() });
        }
        let rhs = thetas.iter().map(|th| eps * (1.0 + dot(th, th))).collect();
        let theta_max = thetas.iter().map(|th| dot(th, th).sqrt()).fold(0.0, f64::max);
        Ok(Self {
            coefs: transpose_rows(thetas.iter().map(|th| regret_coefficients(th)).collect(), moment_len(dim)),
            scratch: (vec![0.0; thetas.len()], vec![0.0; thetas.len()]),
            row: vec![0.0; dim + 2],
            thetas,
            rhs,
            dim,
            window,
            ring: VecDeque::with_capacity((window + 1) * (dim + 2)),
            win: LossSums::new(dim),
            cum: LossSums::new(dim),
            t: 0,
            since_refresh: 0,
            violations: (0, 0),
            max_excess: (f64::NEG_INFINITY, f64::NEG_INFINITY),
            theta_max,
            term_max: 0.0,
            slack: (f64::NEG_INFINITY, f64::NEG_INFINITY),
            drift: (0.0, 0.0),
            checked: 0,
        })
    }

    pub fn push(&mut self, obs: Observation, alg_loss: f64) {
        self.t += 1;
        let stride = self.dim + 2;
        self.cum.add(&obs.x, obs.y, alg_loss, 1.0);
        self.win.add(&obs.x, obs.y, alg_loss, 1.0);
        self.ring.extend(obs.x.iter().copied().chain([obs.y, alg_loss]));
        let b_new = self.term_bound(&obs.x, obs.y, alg_loss);
        let mut b_old = 0.0;
        if self.ring.len() > self.window * stride {
            let row = &mut self.row;
            for v in row.iter_mut() {
                *v = self.ring.pop_front().expect("full window row");
            }
            self.win.add(&row[..self.dim], row[self.dim], row[self.dim + 1], -1.0);
            b_old = self.term_bound(&self.row[..self.dim], self.row[self.dim], self.row[self.dim + 1]);
        }
        let prev_max = self.term_max;
        self.term_max = self.term_max.max(b_new);
        self.since_refresh += 1;
        if self.since_refresh >= self.window {
            self.since_refresh = 0;
            let mut fresh = LossSums::new(self.dim);
            let (a, b) = self.ring.as_slices();
            let rows: Vec<f64> = a.iter().chain(b).copied().collect();
            for row in rows.chunks_exact(stride) {
                fresh.add(&row[..self.dim], row[self.dim], row[self.dim + 1], 1.0);
            }
            self.win = fresh;
        }
        if self.t >= self.window {
            let (r, t) = (self.window as f64, self.t as f64);
            self.drift.0 += (b_new + b_old) / r;
            self.drift.1 += (b_new + prev_max) / t;
            let margin = 1.0 - 1e-9;
            if self.drift.0 < self.slack.0 * margin && self.drift.1 < self.slack.1 * margin {
                return;
            }
            self.checked += 1;
            let mut bad = (false, false);
            let mut worst = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            let (w, c) = &mut self.scratch;
            self.win.regrets(&self.coefs, w);
            self.cum.regrets(&self.coefs, c);
            for ((w, c), rhs) in w.iter().zip(c.iter()).zip(&self.rhs) {
                let ew = w / r - rhs;
                let ec = c / t - rhs;
                worst.0 = worst.0.max(ew);
                worst.1 = worst.1.max(ec);
                bad.0 |= ew > 0.0;
                bad.1 |= ec > 0.0;
            }
            self.violations.0 += bad.0 as usize;
            self.violations.1 += bad.1 as usize;
            self.max_excess = (self.max_excess.0.max(worst.0), self.max_excess.1.max(worst.1));
            self.slack = (-worst.0, -worst.1);
            self.drift = (0.0, 0.0);
        }
    }

    /// Bound on `|ψ_s(θ_s) − ψ_s(θ)|` over the tracked `θ`.
    fn term_bound(&self, x: &[f64], y: f64, alg: f64) -> f64 {
        let r = y.abs() + self.theta_max * dot(x, x).sqrt();
        alg + r * r
    }

    fn averages(&self, sums: &LossSums, n: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.thetas.len()];
        sums.regrets(&self.coefs, &mut out);
        out.iter_mut().for_each(|v| *v /= n);
        out
    }

    /// Largest windowed average regret over the tracked `θ` at the current period.
    pub fn window_regret(&self) -> f64 {
        let r = (self.ring.len() / (self.dim + 2)).max(1) as f64;
        self.averages(&self.win, r).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn report(&self) -> RegretReport {
        let r = (self.ring.len() / (self.dim + 2)).max(1) as f64;
        let t = self.t.max(1) as f64;
        RegretReport {
            thetas: self.thetas.clone(),
            windowed_avg: self.averages(&self.win, r),
            cumulative_avg: self.averages(&self.cum, t),
            bound_rhs: self.rhs.clone(),
            window: self.window,
            periods: self.t,
            violations: self.violations,
            max_excess: self.max_excess,
            checked: self.checked,
        }
    }
}

/// Runs the regressor over `data` and reports regret against each `θ` in
/// `thetas`; the window length is the recall `R` for the windowed variant
/// and `T` otherwise.
pub fn regret_report(params: &RegressorParams, data: &[Observation], thetas: &[Vec<f64>], eps: f64) -> Result<RegretReport> {
    if data.is_empty() {
        return Err(Error::InvalidParameter("regret needs T >= 1".into()));
    }
    let window = params.variant.recall().unwrap_or(data.len()).min(data.len());
    let maintenance = default_maintenance(params);
    let mut reg = Regressor::with_maintenance(params.clone(), maintenance)?;
    let mut tracker = RegretTracker::new(params.dim, window, thetas.to_vec(), eps)?;
    for obs in data {
        let pred = reg.predict(&obs.x)?;
        let l = loss(&pred.theta, obs);
        reg.update(obs.clone())?;
        tracker.push(obs.clone(), l);
    }
    Ok(tracker.report())
}

/// Recompute the window when that costs little, downdate otherwise.
pub fn default_maintenance(params: &RegressorParams) -> WindowMaintenance {
    match params.variant.recall() {
        Some(r) if r * params.dim * params.dim > 1 << 14 => WindowMaintenance::Incremental { refresh: r },
        _ => WindowMaintenance::Recompute,
    }
}

/// `{−2,−1,0,1,2}^d ∩ {||θ|| ≤ 2}` in lexicographic order.
pub fn theta_grid(d: usize) -> Vec<Vec<f64>> {
    let mut acc: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..d {
        acc = acc
            .into_iter()
            .flat_map(|p| {
                (-2..=2).map(move |v| {
                    let mut q = p.clone();
                    q.push(v as f64);
                    q
                })
            })
            .collect();
    }
    acc.into_iter().filter(|th| dot(th, th) <= 4.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::Variant;

    #[test]
    fn zero_targets_give_nonpositive_regret_against_zero() {
        let params = RegressorParams::new(Variant::Forward, 1.0, 1);
        let data = vec![Observation::new(vec![1.0], 0.0); 50];
        let rep = regret_report(&params, &data, &[vec![0.0]], 0.1).unwrap();
        assert!(rep.windowed_avg[0] <= 0.0 && rep.cumulative_avg[0] <= 0.0);
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(theta_grid(1).len(), 5);
        assert_eq!(theta_grid(2).len(), 13);
        assert!(theta_grid(3).iter().all(|t| dot(t, t) <= 4.0));
    }

    #[test]
    fn quadratic_form_matches_direct_sum() {
        let data: Vec<Observation> = (0..20)
            .map(|i| Observation::new(vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()], (i as f64 * 0.7).sin()))
            .collect();
        let mut tr = RegretTracker::new(2, 7, vec![vec![0.5, -1.0]], 0.1).unwrap();
        for o in &data {
            tr.push(o.clone(), 0.25);
        }
        let rep = tr.report();
        let th = [0.5, -1.0];
        let direct: f64 = data[13..].iter().map(|o| 0.25 - loss(&th, o)).sum::<f64>() / 7.0;
        assert!((rep.windowed_avg[0] - direct).abs() < 1e-12);
    }

    #[test]
    fn skipped_periods_match_brute_force_violations() {
        let data: Vec<Observation> = (0..400)
            .map(|i| {
                let f = i as f64;
                Observation::new(vec![0.8 * (f * 0.37).sin(), 0.5 * (f * 0.11).cos()], (f * 0.7).sin().signum())
            })
            .collect();
        let alg: Vec<f64> = (0..400).map(|i| 0.6 + 0.5 * ((i as f64) * 0.05).sin()).collect();
        let thetas = theta_grid(2);
        let (mut any_violation, mut any_skip) = (false, false);
        for eps in [0.0, 0.05, 0.2, 0.4, 1.0] {
            let window = 40;
            let mut tr = RegretTracker::new(2, window, thetas.clone(), eps).unwrap();
            let mut expect = (0, 0);
            for t in 0..data.len() {
                tr.push(data[t].clone(), alg[t]);
                if t + 1 < window {
                    continue;
                }
                let avg = |from: usize, n: f64, th: &[f64]| -> f64 {
                    (from..=t).map(|s| alg[s] - loss(th, &data[s])).sum::<f64>() / n
                };
                let bad_w = thetas.iter().any(|th| avg(t + 1 - window, window as f64, th) > eps * (1.0 + dot(th, th)));
                let bad_c = thetas.iter().any(|th| avg(0, (t + 1) as f64, th) > eps * (1.0 + dot(th, th)));
                expect.0 += bad_w as usize;
                expect.1 += bad_c as usize;
            }
            let rep = tr.report();
            assert_eq!(rep.violations, expect, "eps = {eps}");
            assert!(rep.checked <= data.len() - window + 1);
            any_violation |= expect.0 + expect.1 > 0;
            any_skip |= rep.checked < data.len() - window + 1;
        }
        assert!(any_violation && any_skip);
    }
}
