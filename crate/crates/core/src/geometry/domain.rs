//! Compact convex domains: boxes, probability simplices and their products.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A compact convex subset of `R^m`.
///
/// `Simplex { dim: n }` is the probability simplex in `R^n`; products stack
/// their factors' coordinates in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexDomain {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Simplex { dim: usize },
    Product { factors: Vec<ConvexDomain> },
}

impl ConvexDomain {
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let d = ConvexDomain::Box { lower, upper };
        d.validate()?;
        Ok(d)
    }

    /// The interval `[lo, hi]`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new_box(vec![lo], vec![hi])
    }

    /// The unit cube `[0,1]^m`.
    pub fn unit_box(m: usize) -> Self {
        ConvexDomain::Box { lower: vec![0.0; m], upper: vec![1.0; m] }
    }

    pub fn simplex(n: usize) -> Result<Self> {
        let d = ConvexDomain::Simplex { dim: n };
        d.validate()?;
        Ok(d)
    }

    pub fn product(factors: Vec<ConvexDomain>) -> Result<Self> {
        let d = ConvexDomain::Product { factors };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexDomain::Box { lower, upper } => {
                check_dim(lower.len(), upper.len())?;
                if lower.is_empty() {
                    return Err(Error::InvalidParameter("box of dimension 0".into()));
                }
                for (l, u) in lower.iter().zip(upper) {
                    if !(l.is_finite() && u.is_finite() && l <= u) {
                        return Err(Error::InvalidParameter(format!("box bounds {l} > {u}")));
                    }
                }
                Ok(())
            }
            ConvexDomain::Simplex { dim } => {
                if *dim == 0 {
                    Err(Error::InvalidParameter("simplex dimension must be >= 1".into()))
                } else {
                    Ok(())
                }
            }
            ConvexDomain::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidParameter("empty product".into()));
                }
                factors.iter().try_for_each(|f| f.validate())
            }
        }
    }

    /// Ambient dimension `m`.
    pub fn dim(&self) -> usize {
        match self {
            ConvexDomain::Box { lower, .. } => lower.len(),
            ConvexDomain::Simplex { dim } => *dim,
            ConvexDomain::Product { factors } => factors.iter().map(|f| f.dim()).sum(),
        }
    }

    /// Exact Euclidean diameter.
    pub fn diameter(&self) -> f64 {
        self.diameter_sq().sqrt()
    }

    fn diameter_sq(&self) -> f64 {
        match self {
            ConvexDomain::Box { lower, upper } => {
                lower.iter().zip(upper).map(|(l, u)| (u - l) * (u - l)).sum()
            }
            ConvexDomain::Simplex { dim } => {
                if *dim >= 2 {
                    2.0
                } else {
                    0.0
                }
            }
            ConvexDomain::Product { factors } => factors.iter().map(|f| f.diameter_sq()).sum(),
        }
    }

    /// Factors of a product, or the domain itself.
    pub fn factors(&self) -> Vec<&ConvexDomain> {
        match self {
            ConvexDomain::Product { factors } => factors.iter().flat_map(|f| f.factors()).collect(),
            other => vec![other],
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            ConvexDomain::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
            ConvexDomain::Simplex { dim } => {
                x.iter().all(|v| *v >= -tol)
                    && (x.iter().sum::<f64>() - 1.0).abs() <= tol * (*dim as f64).max(1.0)
            }
            ConvexDomain::Product { factors } => {
                let mut off = 0;
                factors.iter().all(|f| {
                    let k = f.dim();
                    let ok = f.contains(&x[off..off + k], tol);
                    off += k;
                    ok
                })
            }
        }
    }

    /// Euclidean projection `γ(b)`.
    pub fn project(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), b.len())?;
        let mut out = b.to_vec();
        self.project_in_place(&mut out);
        Ok(out)
    }

    /// Projects `x` (of dimension `m`) onto the domain in place.
    pub fn project_in_place(&self, x: &mut [f64]) {
        match self {
            ConvexDomain::Box { lower, upper } => {
                for ((v, l), u) in x.iter_mut().zip(lower).zip(upper) {
                    *v = v.clamp(*l, *u);
                }
            }
            ConvexDomain::Simplex { .. } => project_simplex(x),
            ConvexDomain::Product { factors } => {
                let mut off = 0;
                for f in factors {
                    let k = f.dim();
                    f.project_in_place(&mut x[off..off + k]);
                    off += k;
                }
            }
        }
    }

    /// Extreme points in lexicographic order.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let mut out = match self {
            ConvexDomain::Box { lower, upper } => {
                let mut acc: Vec<Vec<f64>> = vec![vec![]];
                for (l, u) in lower.iter().zip(upper) {
                    let opts: Vec<f64> = if l == u { vec![*l] } else { vec![*l, *u] };
                    acc = acc
                        .into_iter()
                        .flat_map(|p| {
                            opts.iter().map(move |v| {
                                let mut q = p.clone();
                                q.push(*v);
                                q
                            })
                        })
                        .collect();
                }
                acc
            }
            ConvexDomain::Simplex { dim } => (0..*dim)
                .map(|i| {
                    let mut e = vec![0.0; *dim];
                    e[i] = 1.0;
                    e
                })
                .collect(),
            ConvexDomain::Product { factors } => {
                let mut acc: Vec<Vec<f64>> = vec![vec![]];
                for f in factors {
                    let vs = f.vertices();
                    acc = acc
                        .into_iter()
                        .flat_map(|p| {
                            vs.iter().map(move |v| {
                                let mut q = p.clone();
                                q.extend_from_slice(v);
                                q
                            })
                        })
                        .collect();
                }
                acc
            }
        };
        out.sort_by(|a, b| lex_cmp(a, b));
        out
    }

    /// A point of the domain used as a neutral starting value.
    pub fn center(&self) -> Vec<f64> {
        match self {
            ConvexDomain::Box { lower, upper } => {
                lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect()
            }
            ConvexDomain::Simplex { dim } => vec![1.0 / *dim as f64; *dim],
            ConvexDomain::Product { factors } => factors.iter().flat_map(|f| f.center()).collect(),
        }
    }

    /// Lattice whose covering radius is at most `radius`.
    pub fn lattice(&self, radius: f64) -> Result<Lattice> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("lattice radius {radius} must be positive")));
        }
        let flat = self.factors();
        let per = radius / (flat.len() as f64).sqrt();
        let factors = flat
            .into_iter()
            .map(|f| match f {
                ConvexDomain::Box { lower, upper } => {
                    let h = 2.0 * per / (lower.len() as f64).sqrt();
                    let divisions = lower
                        .iter()
                        .zip(upper)
                        .map(|(l, u)| ((u - l) / h - 1e-12).ceil().max(0.0) as usize)
                        .collect();
                    LatticeFactor::Box { lower: lower.clone(), upper: upper.clone(), divisions }
                }
                ConvexDomain::Simplex { dim } => {
                    let n = if *dim == 1 { 1 } else { ((*dim as f64).sqrt() / per - 1e-12).ceil().max(1.0) as usize };
                    LatticeFactor::Simplex { dim: *dim, divisions: n }
                }
                ConvexDomain::Product { .. } => unreachable!("factors are flattened"),
            })
            .collect();
        Ok(Lattice { factors })
    }
}

/// Lexicographic comparison of equal-length points.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Sort-and-threshold projection onto the probability simplex.
pub fn project_simplex(x: &mut [f64]) {
    let n = x.len();
    if n == 0 {
        return;
    }
    let mut u = x.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            tau = t;
        }
    }
    for v in x.iter_mut() {
        *v = (*v - tau).max(0.0);
    }
}

/// One factor of a [`Lattice`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatticeFactor {
    /// Uniform subdivision of every coordinate interval.
    Box { lower: Vec<f64>, upper: Vec<f64>, divisions: Vec<usize> },
    /// Points `k / divisions` with integer `k` summing to `divisions`.
    Simplex { dim: usize, divisions: usize },
}

/// A finite grid in a domain, used both as probe set and as forecast grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub factors: Vec<LatticeFactor>,
}

fn box_coord(l: f64, u: f64, n: usize, k: usize) -> f64 {
    if n == 0 {
        l
    } else {
        l + (u - l) * (k as f64) / (n as f64)
    }
}

impl LatticeFactor {
    fn dim(&self) -> usize {
        match self {
            LatticeFactor::Box { lower, .. } => lower.len(),
            LatticeFactor::Simplex { dim, .. } => *dim,
        }
    }

    fn covering_radius_sq(&self) -> f64 {
        match self {
            LatticeFactor::Box { lower, upper, divisions } => lower
                .iter()
                .zip(upper)
                .zip(divisions)
                .map(|((l, u), n)| if *n == 0 { 0.0 } else { ((u - l) / (2.0 * *n as f64)).powi(2) })
                .sum(),
            LatticeFactor::Simplex { dim, divisions } => {
                if *dim == 1 {
                    0.0
                } else {
                    *dim as f64 / (*divisions as f64).powi(2)
                }
            }
        }
    }

    fn points(&self) -> Vec<Vec<f64>> {
        match self {
            LatticeFactor::Box { lower, upper, divisions } => {
                let mut acc: Vec<Vec<f64>> = vec![vec![]];
                for ((l, u), n) in lower.iter().zip(upper).zip(divisions) {
                    acc = acc
                        .into_iter()
                        .flat_map(|p| {
                            (0..=*n).map(move |k| {
                                let mut q = p.clone();
                                q.push(box_coord(*l, *u, *n, k));
                                q
                            })
                        })
                        .collect();
                }
                acc
            }
            LatticeFactor::Simplex { dim, divisions } => {
                let mut out = Vec::new();
                let mut ks = vec![0usize; *dim];
                compositions(*divisions, 0, &mut ks, &mut out, *divisions);
                out
            }
        }
    }

    fn snap(&self, x: &mut [f64]) {
        match self {
            LatticeFactor::Box { lower, upper, divisions } => {
                for (i, v) in x.iter_mut().enumerate() {
                    let (l, u, n) = (lower[i], upper[i], divisions[i]);
                    if n == 0 {
                        *v = l;
                        continue;
                    }
                    let t = ((*v - l) / (u - l) * n as f64).clamp(0.0, n as f64);
                    let mut k = t.floor();
                    if t - k > 0.5 {
                        k += 1.0;
                    }
                    *v = box_coord(l, u, n, (k as usize).min(n));
                }
            }
            LatticeFactor::Simplex { dim, divisions } => {
                let n = *divisions as f64;
                let mut ks: Vec<usize> = Vec::with_capacity(*dim);
                let mut fr: Vec<(f64, usize)> = Vec::with_capacity(*dim);
                for (i, v) in x.iter().enumerate() {
                    let y = (v.max(0.0)) * n;
                    let f = y.floor();
                    ks.push(f as usize);
                    fr.push((y - f, i));
                }
                let total: usize = ks.iter().sum();
                let missing = divisions.saturating_sub(total).min(*dim);
                // Largest remainders first; among equal remainders the later
                // coordinate is raised, which keeps the point lexicographically first.
                fr.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then(b.1.cmp(&a.1)));
                for &(_, i) in fr.iter().take(missing) {
                    ks[i] += 1;
                }
                let mut excess = ks.iter().sum::<usize>().saturating_sub(*divisions);
                while excess > 0 {
                    let i = (0..*dim).filter(|&i| ks[i] > 0).max_by(|&a, &b| {
                        let (fa, fb) = (x[a] * n - ks[a] as f64, x[b] * n - ks[b] as f64);
                        fb.partial_cmp(&fa).unwrap_or(std::cmp::Ordering::Equal)
                    });
                    match i {
                        Some(i) => ks[i] -= 1,
                        None => break,
                    }
                    excess -= 1;
                }
                for (v, k) in x.iter_mut().zip(&ks) {
                    *v = *k as f64 / n;
                }
            }
        }
    }
}

fn compositions(total: usize, i: usize, ks: &mut Vec<usize>, out: &mut Vec<Vec<f64>>, n: usize) {
    let dim = ks.len();
    if i + 1 == dim {
        ks[i] = total;
        out.push(ks.iter().map(|k| *k as f64 / n as f64).collect());
        return;
    }
    for k in 0..=total {
        ks[i] = k;
        compositions(total - k, i + 1, ks, out, n);
    }
}

impl Lattice {
    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).sum()
    }

    /// Upper bound on the distance from any domain point to its snapped image.
    pub fn covering_radius(&self) -> f64 {
        self.factors.iter().map(|f| f.covering_radius_sq()).sum::<f64>().sqrt()
    }

    /// All lattice points in lexicographic order (first coordinate slowest).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut acc: Vec<Vec<f64>> = vec![vec![]];
        for f in &self.factors {
            let pts = f.points();
            acc = acc
                .into_iter()
                .flat_map(|p| {
                    pts.iter().map(move |q| {
                        let mut r = p.clone();
                        r.extend_from_slice(q);
                        r
                    })
                })
                .collect();
        }
        acc
    }

    /// Replaces a domain point by its nearest lattice point, lexicographic-first on ties.
    pub fn snap_in_place(&self, x: &mut [f64]) {
        let mut off = 0;
        for f in &self.factors {
            let k = f.dim();
            f.snap(&mut x[off..off + k]);
            off += k;
        }
    }

    pub fn snap(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.snap_in_place(&mut y);
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_projection() {
        let d = ConvexDomain::interval(0.0, 1.0).unwrap();
        assert_eq!(d.project(&[0.4]).unwrap(), vec![0.4]);
        assert_eq!(d.project(&[1.5]).unwrap(), vec![1.0]);
        assert!(d.project(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn simplex_projection_of_equal_excess() {
        let d = ConvexDomain::simplex(2).unwrap();
        let p = d.project(&[0.9, 0.9]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn diameters() {
        assert_eq!(ConvexDomain::unit_box(2).diameter(), 2f64.sqrt());
        assert_eq!(ConvexDomain::simplex(3).unwrap().diameter(), 2f64.sqrt());
        assert_eq!(ConvexDomain::simplex(1).unwrap().diameter(), 0.0);
        let p = ConvexDomain::product(vec![ConvexDomain::simplex(2).unwrap(); 2]).unwrap();
        assert!((p.diameter() - 2.0).abs() < 1e-15);
        assert_eq!(p.dim(), 4);
    }

    #[test]
    fn invalid_domains_rejected() {
        assert!(ConvexDomain::new_box(vec![1.0], vec![0.0]).is_err());
        assert!(ConvexDomain::simplex(0).is_err());
    }

    #[test]
    fn simplex_lattice_is_lexicographic() {
        let l = Lattice { factors: vec![LatticeFactor::Simplex { dim: 2, divisions: 2 }] };
        assert_eq!(l.points(), vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]);
    }

    #[test]
    fn snap_ties_go_lexicographically_first() {
        let l = Lattice { factors: vec![LatticeFactor::Box { lower: vec![0.0], upper: vec![1.0], divisions: vec![10] }] };
        assert_eq!(l.snap(&[0.25]), vec![0.2]);
        assert_eq!(l.snap(&[1.0]), vec![1.0]);
        let s = Lattice { factors: vec![LatticeFactor::Simplex { dim: 2, divisions: 2 }] };
        assert_eq!(s.snap(&[0.75, 0.25]), vec![0.5, 0.5]);
        assert_eq!(s.snap(&[0.8, 0.2]), vec![1.0, 0.0]);
    }

    #[test]
    fn lattice_radius_respected() {
        let d = ConvexDomain::product(vec![ConvexDomain::simplex(3).unwrap(), ConvexDomain::unit_box(2)]).unwrap();
        let l = d.lattice(0.1).unwrap();
        assert!(l.covering_radius() <= 0.1 + 1e-12);
    }
}
