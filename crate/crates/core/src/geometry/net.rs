//! Greedy maximal `2ε`-nets over a deterministic probe lattice.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::domain::ConvexDomain;
use crate::error::{Error, Result};
use crate::linalg::dist;

/// Centers with pairwise distance at least `2 radius` covering the domain at `2 radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub domain: ConvexDomain,
    pub radius: f64,
    pub centers: Vec<Vec<f64>>,
    /// Covering radius of the probe lattice the net was built on.
    pub probe_resolution: f64,
    /// Every domain point lies within this distance of a center.
    pub certified_coverage: f64,
}

impl Net {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }
}

/// Uniform-cell bucket index over a point set.
#[derive(Debug, Clone)]
pub(crate) struct CellIndex {
    cell: f64,
    dim: usize,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl CellIndex {
    pub(crate) fn new(cell: f64, dim: usize) -> Self {
        Self { cell, dim, buckets: HashMap::new() }
    }

    fn key(&self, x: &[f64]) -> Vec<i64> {
        x.iter().map(|v| (v / self.cell).floor() as i64).collect()
    }

    pub(crate) fn insert(&mut self, x: &[f64], id: usize) {
        let k = self.key(x);
        self.buckets.entry(k).or_default().push(id);
    }

    /// Ids stored in the `3^m` cells around `x`, in no particular order.
    pub(crate) fn neighbours(&self, x: &[f64], out: &mut Vec<usize>) {
        out.clear();
        let base = self.key(x);
        let mut off = vec![-1i64; self.dim];
        let mut key = base.clone();
        loop {
            for i in 0..self.dim {
                key[i] = base[i] + off[i];
            }
            if let Some(ids) = self.buckets.get(&key) {
                out.extend_from_slice(ids);
            }
            let mut i = 0;
            while i < self.dim {
                off[i] += 1;
                if off[i] <= 1 {
                    break;
                }
                off[i] = -1;
                i += 1;
            }
            if i == self.dim {
                break;
            }
        }
    }
}

/// Largest dimension for which neighbour-cell lookups beat a linear scan.
pub(crate) const INDEX_MAX_DIM: usize = 6;

/// Builds a maximal `2ε`-net greedily over a lexicographic probe lattice
/// whose covering radius is at most `probe_resolution`.
pub fn maximal_net(domain: &ConvexDomain, eps: f64, probe_resolution: f64) -> Result<Net> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("net radius {eps} must be positive")));
    }
    domain.validate()?;
    let lattice = domain.lattice(probe_resolution)?;
    let r_p = lattice.covering_radius();
    if r_p > eps / 2.0 {
        return Err(Error::CoarseProbeGrid { radius: r_p, limit: eps / 2.0 });
    }
    let m = domain.dim();
    let probes = lattice.points();
    let two = 2.0 * eps;
    let use_index = m <= INDEX_MAX_DIM;
    let mut index = CellIndex::new(two, m);
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut near = Vec::new();
    for p in &probes {
        let far = if use_index {
            index.neighbours(p, &mut near);
            near.iter().all(|&k| dist(&centers[k], p) >= two)
        } else {
            centers.iter().all(|c| dist(c, p) >= two)
        };
        if far {
            index.insert(p, centers.len());
            centers.push(p.clone());
        }
    }
    let mut slack: f64 = 0.0;
    for p in &probes {
        let nearest = if use_index {
            index.neighbours(p, &mut near);
            near.iter().map(|&k| dist(&centers[k], p)).fold(f64::INFINITY, f64::min)
        } else {
            centers.iter().map(|c| dist(c, p)).fold(f64::INFINITY, f64::min)
        };
        slack = slack.max(nearest);
    }
    Ok(Net {
        domain: domain.clone(),
        radius: eps,
        centers,
        probe_resolution: r_p,
        certified_coverage: slack + r_p,
    })
}

/// [`maximal_net`] with the default probe resolution `ε/4`.
pub fn maximal_net_default(domain: &ConvexDomain, eps: f64) -> Result<Net> {
    maximal_net(domain, eps, eps / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_quarter() {
        let d = ConvexDomain::interval(0.0, 1.0).unwrap();
        let net = maximal_net(&d, 0.25, 1.0 / 32.0).unwrap();
        assert_eq!(net.centers, vec![vec![0.0], vec![0.5], vec![1.0]]);
    }

    #[test]
    fn large_radius_single_center() {
        let d = ConvexDomain::interval(0.0, 1.0).unwrap();
        for eps in [0.51, 0.75, 3.0] {
            let net = maximal_net_default(&d, eps).unwrap();
            assert_eq!(net.centers, vec![vec![0.0]]);
        }
        // At exactly 0.5 the far endpoint sits at distance 2ε and is admitted.
        let net = maximal_net_default(&d, 0.5).unwrap();
        assert_eq!(net.centers, vec![vec![0.0], vec![1.0]]);
    }

    #[test]
    fn coarse_probes_reported() {
        let d = ConvexDomain::unit_box(2);
        assert!(matches!(maximal_net(&d, 0.1, 0.2), Err(Error::CoarseProbeGrid { .. })));
        assert!(maximal_net(&d, 0.0, 0.01).is_err());
    }
}
