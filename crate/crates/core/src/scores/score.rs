use serde::{Deserialize, Serialize};

use super::kernel::SmoothingKernel;
use super::transcript::{Group, Transcript};
use super::weight::WeightFunction;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, norm};

/// Which average is smoothed in the smoothed score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothedVariant {
    BothSmoothed,
    ActionOnly,
}

/// `K_T`.
pub fn calibration_score(t: &Transcript) -> Result<f64> {
    t.require_nonempty()?;
    let groups = t.groups();
    Ok(exact_score(&groups, t.len()))
}

fn exact_score(groups: &[Group], total: usize) -> f64 {
    let mut acc = 0.0;
    for g in groups {
        let mut s = 0.0;
        for (a, c) in g.a_sum.iter().zip(&g.c) {
            let d = a / g.n - c;
            s += d * d;
        }
        acc += g.n * s.sqrt();
    }
    acc / total as f64
}

/// Enumerates, for a group, all groups with nonzero kernel weight.
struct Neighbors {
    kernel: SmoothingKernel,
    sorted: Option<Vec<usize>>,
}

impl Neighbors {
    fn new(points: &[&[f64]], kernel: SmoothingKernel) -> Self {
        let sorted = match kernel.support_radius() {
            Some(r) if r > 0.0 && points.first().is_some_and(|p| p.len() == 1) => {
                let mut idx: Vec<usize> = (0..points.len()).collect();
                idx.sort_by(|&i, &j| points[i][0].total_cmp(&points[j][0]));
                Some(idx)
            }
            _ => None,
        };
        Self { kernel, sorted }
    }

    fn visit(&self, points: &[&[f64]], g: usize, mut f: impl FnMut(usize, f64)) {
        let c = points[g];
        match (&self.kernel, &self.sorted) {
            (SmoothingKernel::Indicator, _) => f(g, 1.0),
            (_, Some(idx)) => {
                let r = self.kernel.support_radius().unwrap_or(f64::INFINITY);
                let lo = idx.partition_point(|&i| points[i][0] <= c[0] - r);
                for &h in &idx[lo..] {
                    if points[h][0] >= c[0] + r {
                        break;
                    }
                    let w = self.kernel.eval(points[h], c);
                    if w > 0.0 {
                        f(h, w);
                    }
                }
            }
            _ => {
                for (h, p) in points.iter().enumerate() {
                    let w = self.kernel.eval(p, c);
                    if w > 0.0 {
                        f(h, w);
                    }
                }
            }
        }
    }
}

/// Smoothed averages at one distinct forecast value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedPoint {
    pub c: Vec<f64>,
    pub count: usize,
    pub weight: f64,
    pub a_bar: Vec<f64>,
    pub c_bar: Vec<f64>,
}

/// `ā^Λ` and `c^Λ` at every distinct forecast, in order of first appearance.
pub fn smoothed_averages(t: &Transcript, kernel: SmoothingKernel) -> Result<Vec<SmoothedPoint>> {
    t.require_nonempty()?;
    let groups = t.groups();
    Ok(smoothed_points(&groups, kernel))
}

fn smoothed_points(groups: &[Group], kernel: SmoothingKernel) -> Vec<SmoothedPoint> {
    let m = groups[0].c.len();
    let points: Vec<&[f64]> = groups.iter().map(|g| g.c.as_slice()).collect();
    let nb = Neighbors::new(&points, kernel);
    let mut out = Vec::with_capacity(groups.len());
    for (gi, g) in groups.iter().enumerate() {
        let mut w = 0.0;
        let mut a = vec![0.0; m];
        let mut c = vec![0.0; m];
        nb.visit(&points, gi, |h, lam| {
            let gh = &groups[h];
            w += lam * gh.n;
            for i in 0..m {
                a[i] += lam * gh.a_sum[i];
                c[i] += lam * gh.n * gh.c[i];
            }
        });
        for i in 0..m {
            a[i] /= w;
            c[i] /= w;
        }
        out.push(SmoothedPoint { c: g.c.clone(), count: g.n as usize, weight: w, a_bar: a, c_bar: c });
    }
    out
}

/// `K_T^Λ` or `K̃_T^Λ`.
pub fn smoothed_score(t: &Transcript, kernel: SmoothingKernel, variant: SmoothedVariant) -> Result<f64> {
    t.require_nonempty()?;
    let groups = t.groups();
    if kernel == SmoothingKernel::Indicator {
        return Ok(exact_score(&groups, t.len()));
    }
    let pts = smoothed_points(&groups, kernel);
    Ok(score_from_points(&pts, variant, t.len()))
}

/// Both smoothed variants from a single pass, `(K_T^Λ, K̃_T^Λ)`.
pub fn smoothed_scores(t: &Transcript, kernel: SmoothingKernel) -> Result<(f64, f64)> {
    t.require_nonempty()?;
    let groups = t.groups();
    if kernel == SmoothingKernel::Indicator {
        let k = exact_score(&groups, t.len());
        return Ok((k, k));
    }
    let pts = smoothed_points(&groups, kernel);
    Ok((
        score_from_points(&pts, SmoothedVariant::BothSmoothed, t.len()),
        score_from_points(&pts, SmoothedVariant::ActionOnly, t.len()),
    ))
}

fn score_from_points(pts: &[SmoothedPoint], variant: SmoothedVariant, total: usize) -> f64 {
    let mut acc = 0.0;
    for p in pts {
        let c = match variant {
            SmoothedVariant::BothSmoothed => &p.c_bar,
            SmoothedVariant::ActionOnly => &p.c,
        };
        acc += p.count as f64 * dist(&p.a_bar, c);
    }
    acc / total as f64
}

/// `S_T^w`.
pub fn weak_score(t: &Transcript, w: &WeightFunction) -> Result<f64> {
    t.require_nonempty()?;
    let m = t.dim();
    let mut s = vec![0.0; m];
    for (c, a) in t.iter() {
        let wc = w.eval(c);
        for i in 0..m {
            s[i] += wc * (a[i] - c[i]);
        }
    }
    Ok(norm(&s) / t.len() as f64)
}

/// Largest weak score over the `2m` coordinate sign-split indicators, and `K_T`.
pub fn indicator_sup_bound(t: &Transcript) -> Result<(f64, f64)> {
    t.require_nonempty()?;
    let m = t.dim();
    let groups = t.groups();
    let total = t.len() as f64;
    let mut sup: f64 = 0.0;
    for i in 0..m {
        let mut pos = vec![0.0; m];
        let mut neg = vec![0.0; m];
        for g in &groups {
            let diff = g.a_sum[i] / g.n - g.c[i];
            let target = if diff > 0.0 {
                &mut pos
            } else if diff < 0.0 {
                &mut neg
            } else {
                continue;
            };
            for j in 0..m {
                target[j] += g.a_sum[j] - g.n * g.c[j];
            }
        }
        sup = sup.max(norm(&pos) / total).max(norm(&neg) / total);
    }
    Ok((sup, exact_score(&groups, t.len())))
}

/// Dimension constant `γ` used by the averaging bound, for diameter `alpha`.
pub fn gamma(m: usize, alpha: f64) -> f64 {
    let mf = m as f64;
    2.0 * 2f64.powf((mf + 3.0) / 2.0) * alpha.powf(mf / 2.0) * mf.powf(mf / 4.0)
}

/// Both sides of the kernel averaging inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragingBound {
    pub lhs: f64,
    pub rhs: f64,
    /// `2√(2κα⌈2αL√m⌉^m)`, the bound before simplification.
    pub rhs_exact: f64,
    pub kappa: f64,
    pub gamma: f64,
}

impl AveragingBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-12)
    }
}

/// Computes `(1/T)Σ||B_t||/W_t` and its bound `γL^{m/2}√κ`, `κ = (1/T)max||B_t||`.
pub fn averaging_bound(
    forecasts: &[Vec<f64>],
    residuals: &[Vec<f64>],
    kernel: SmoothingKernel,
    alpha: f64,
) -> Result<AveragingBound> {
    if forecasts.is_empty() {
        return Err(Error::EmptyTranscript);
    }
    check_dim(forecasts.len(), residuals.len())?;
    let m = forecasts[0].len();
    for (c, b) in forecasts.iter().zip(residuals) {
        check_dim(m, c.len())?;
        check_dim(m, b.len())?;
    }
    let mut groups: Vec<Group> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for (c, b) in forecasts.iter().zip(residuals) {
        let key: Vec<u64> = c.iter().map(|v| v.to_bits()).collect();
        let g = *index.entry(key).or_insert_with(|| {
            groups.push(Group { c: c.clone(), n: 0.0, a_sum: vec![0.0; m] });
            groups.len() - 1
        });
        groups[g].n += 1.0;
        for (s, x) in groups[g].a_sum.iter_mut().zip(b) {
            *s += x;
        }
    }
    let points: Vec<&[f64]> = groups.iter().map(|g| g.c.as_slice()).collect();
    let nb = Neighbors::new(&points, kernel);
    let total = forecasts.len() as f64;
    let mut lhs = 0.0;
    let mut max_b: f64 = 0.0;
    for (gi, g) in groups.iter().enumerate() {
        let mut w = 0.0;
        let mut bv = vec![0.0; m];
        nb.visit(&points, gi, |h, lam| {
            w += lam * groups[h].n;
            for i in 0..m {
                bv[i] += lam * groups[h].a_sum[i];
            }
        });
        let nb_norm = norm(&bv);
        lhs += g.n * nb_norm / w;
        max_b = max_b.max(nb_norm);
    }
    let kappa = max_b / total;
    let l = kernel.lipschitz();
    let mf = m as f64;
    let gam = gamma(m, alpha);
    let rhs = gam * l.powf(mf / 2.0) * kappa.sqrt();
    let cells = (2.0 * alpha * l * mf.sqrt()).ceil().powi(m as i32);
    let rhs_exact = 2.0 * (2.0 * kappa * alpha * cells).sqrt();
    Ok(AveragingBound { lhs: lhs / total, rhs, rhs_exact, kappa, gamma: gam })
}

/// Direction of a score conversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConversionDirection {
    WeakToSmooth,
    SmoothToWeak,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conversion {
    pub eps_prime: f64,
    pub l_prime: f64,
    /// Intermediate `ε_1 = √(εL^m)` of the smooth-to-weak direction.
    pub eps1: Option<f64>,
}

/// Closed-form constants converting between weak and smooth calibration.
pub fn conversion_constants(direction: ConversionDirection, eps: f64, l: f64, m: usize, gamma: f64) -> Result<Conversion> {
    if !(eps >= 0.0) || !(l >= 1.0) {
        return Err(Error::InvalidParameter(format!("need eps >= 0 and L >= 1, got eps={eps}, L={l}")));
    }
    let mf = m as f64;
    Ok(match direction {
        ConversionDirection::WeakToSmooth => Conversion {
            eps_prime: gamma * l.powf(mf / 2.0) * eps.sqrt(),
            l_prime: l,
            eps1: None,
        },
        ConversionDirection::SmoothToWeak => {
            let eps1 = (eps * l.powf(mf)).sqrt();
            Conversion {
                eps_prime: eps1 * (1.0 + mf.sqrt() + mf.powf(mf + 1.0).sqrt()),
                l_prime: (eps * l.powf(mf + 2.0)).sqrt() / 2.0,
                eps1: Some(eps1),
            }
        }
    })
}
