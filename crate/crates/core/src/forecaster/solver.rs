use serde::{Deserialize, Serialize};

use super::config::SolverOptions;
use crate::error::{Error, Result};
use crate::geometry::ConvexDomain;
use crate::linalg::dist;

/// The solver stage that produced the accepted point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStage {
    Damped,
    Newton,
    SlowDamped,
    Bisection,
    LatticeSearch,
    /// Best point found, accepted only under the coarse tolerance.
    Coarse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub b: Vec<f64>,
    pub residual: f64,
    pub stage: SolverStage,
    pub evaluations: usize,
}

struct Search<'f> {
    h: &'f mut dyn FnMut(&[f64], &mut [f64]),
    m: usize,
    evals: usize,
    best: Vec<f64>,
    best_res: f64,
    tmp: Vec<f64>,
}

impl<'f> Search<'f> {
    /// Residual `||H(b) − b||`, writing `H(b)` into `hb`; tracks the best point.
    fn residual(&mut self, b: &[f64], hb: &mut [f64]) -> f64 {
        (self.h)(b, hb);
        self.evals += 1;
        let r = dist(hb, b);
        if r < self.best_res {
            self.best_res = r;
            self.best.copy_from_slice(b);
        }
        r
    }

    fn damped(&mut self, start: &[f64], eta: f64, max_iter: usize, tol: f64) -> bool {
        let m = self.m;
        let mut b = start.to_vec();
        let mut hb = vec![0.0; m];
        let mut checkpoint = f64::INFINITY;
        let mut local_best = f64::INFINITY;
        for it in 0..max_iter {
            let r = self.residual(&b, &mut hb);
            if r <= tol {
                return true;
            }
            local_best = local_best.min(r);
            if it % 50 == 49 {
                if local_best > 0.5 * checkpoint {
                    return false;
                }
                checkpoint = local_best;
            }
            for i in 0..m {
                b[i] = (1.0 - eta) * b[i] + eta * hb[i];
            }
        }
        false
    }

    fn newton(&mut self, start: &[f64], tol: f64, max_steps: usize) -> bool {
        let m = self.m;
        let mut b = start.to_vec();
        let mut hb = vec![0.0; m];
        let mut r = self.residual(&b, &mut hb);
        let mut jac = vec![0.0; m * m];
        let mut hp = vec![0.0; m];
        let mut trial = vec![0.0; m];
        let mut htrial = vec![0.0; m];
        for _ in 0..max_steps {
            if r <= tol {
                return true;
            }
            let g: Vec<f64> = hb.iter().zip(&b).map(|(h, x)| h - x).collect();
            for k in 0..m {
                let step = 1e-7 * b[k].abs().max(1.0);
                self.tmp.copy_from_slice(&b);
                self.tmp[k] += step;
                let probe = self.tmp.clone();
                (self.h)(&probe, &mut hp);
                self.evals += 1;
                for i in 0..m {
                    let gi = hp[i] - probe[i];
                    jac[i * m + k] = (gi - g[i]) / step;
                }
            }
            let delta = match solve_dense(&jac, &g.iter().map(|v| -v).collect::<Vec<_>>(), m) {
                Some(d) => d,
                None => return false,
            };
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                for i in 0..m {
                    trial[i] = b[i] + t * delta[i];
                }
                let rt = self.residual(&trial.clone(), &mut htrial);
                if rt < (1.0 - 1e-4 * t) * r {
                    b.copy_from_slice(&trial);
                    hb.copy_from_slice(&htrial);
                    r = rt;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                return r <= tol;
            }
        }
        r <= tol
    }

    /// `m = 1`: bisection of `H(b) − b` on `[−K−1, K+1]`.
    fn bisection(&mut self, k: f64, tol: f64) -> bool {
        let mut hb = [0.0];
        let (mut lo, mut hi) = (-k - 1.0, k + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            self.residual(&[mid], &mut hb);
            if hb[0] - mid > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if self.best_res <= tol {
                return true;
            }
        }
        self.residual(&[lo], &mut hb);
        self.residual(&[hi], &mut hb);
        self.best_res <= tol
    }
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))?;
        if m[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            x.swap(piv, col);
        }
        for r in col + 1..n {
            let f = m[r * n + col] / m[col * n + col];
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for k in col + 1..n {
            s -= m[col * n + k] * x[k];
        }
        x[col] = s / m[col * n + col];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn corners(m: usize, k: f64) -> Vec<Vec<f64>> {
    (0..1usize << m)
        .map(|mask| (0..m).map(|i| if mask >> (m - 1 - i) & 1 == 1 { k } else { -k }).collect())
        .collect()
}

/// Finds `b` with `||h(b) − b|| ≤ tol`, where `|h_j| ≤ k` and `h` factors
/// through the projection onto `domain`.
///
/// Stages, each deterministic: damped iteration from `0`; Newton with a
/// difference Jacobian; bisection when `m = 1`; damped iteration from the
/// corners of `[−K, K]^m`; slower damping; a lattice scan of the domain
/// followed by Newton. The best point is accepted under `tol_coarse` if
/// nothing reaches `tol`.
pub fn solve_fixed_point(
    h: &mut dyn FnMut(&[f64], &mut [f64]),
    domain: &ConvexDomain,
    k: f64,
    opts: &SolverOptions,
) -> Result<FixedPoint> {
    let m = domain.dim();
    let mut s = Search { h, m, evals: 0, best: vec![0.0; m], best_res: f64::INFINITY, tmp: vec![0.0; m] };
    let done = |s: &Search, stage| FixedPoint { b: s.best.clone(), residual: s.best_res, stage, evaluations: s.evals };

    if s.damped(&vec![0.0; m], opts.eta, opts.max_iter, opts.tol) {
        return Ok(done(&s, SolverStage::Damped));
    }
    let best = s.best.clone();
    if s.newton(&best, opts.tol, 60) {
        return Ok(done(&s, SolverStage::Newton));
    }
    if m == 1 && s.bisection(k, opts.tol) {
        return Ok(done(&s, SolverStage::Bisection));
    }
    for st in corners(m, k) {
        if s.damped(&st, opts.eta, opts.max_iter, opts.tol) {
            return Ok(done(&s, SolverStage::Damped));
        }
    }
    for eta in [0.1, 0.02] {
        let best = s.best.clone();
        if s.damped(&best, eta, opts.max_iter, opts.tol) {
            return Ok(done(&s, SolverStage::SlowDamped));
        }
    }
    if m > 1 {
        let lattice = domain.lattice(0.02)?;
        let mut hc = vec![0.0; m];
        let mut scored: Vec<(f64, Vec<f64>)> = lattice
            .points()
            .into_iter()
            .map(|c| {
                (s.h)(&c, &mut hc);
                s.evals += 1;
                let mut gc = hc.clone();
                domain.project_in_place(&mut gc);
                (dist(&gc, &c), hc.clone())
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, b0) in scored.iter().take(8) {
            if s.newton(b0, opts.tol, 60) || s.damped(&s.best.clone(), 0.02, opts.max_iter, opts.tol) {
                return Ok(done(&s, SolverStage::LatticeSearch));
            }
        }
    }
    if s.best_res <= opts.tol_coarse {
        Ok(done(&s, SolverStage::Coarse))
    } else {
        Err(Error::FixedPoint { residual: s.best_res, tolerance: opts.tol_coarse })
    }
}
