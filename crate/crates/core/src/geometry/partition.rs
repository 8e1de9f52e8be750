//! Tent partition of unity subordinate to a maximal net.

use std::sync::Arc;

use super::net::{CellIndex, Net, INDEX_MAX_DIM};
use crate::error::{check_dim, Error, Result};
use crate::linalg::dist;

/// `β_k(x) = α_k(x) / Σ_j α_j(x)` with `α_k(x) = [3ε − ||x − z_k||]_+`.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    net: Arc<Net>,
    index: Option<Arc<CellIndex>>,
}

/// Linear scans are cheaper than cell lookups below this many centers.
const SCAN_LIMIT: usize = 48;

impl PartitionOfUnity {
    pub fn new(net: Net) -> Self {
        let m = net.dim();
        let index = if net.len() > SCAN_LIMIT && m <= INDEX_MAX_DIM {
            let mut idx = CellIndex::new(3.0 * net.radius, m);
            for (k, z) in net.centers.iter().enumerate() {
                idx.insert(z, k);
            }
            Some(Arc::new(idx))
        } else {
            None
        };
        Self { net: Arc::new(net), index }
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn len(&self) -> usize {
        self.net.len()
    }

    pub fn is_empty(&self) -> bool {
        self.net.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.net.dim()
    }

    /// Bound (v) on the Lipschitz constant of every `β_k`.
    pub fn lipschitz_bound(&self) -> f64 {
        4f64.powi(self.dim() as i32 + 2) / self.net.radius
    }

    /// Nonzero `(k, β_k(x))` pairs sorted by `k`; returns `ᾱ(x)`.
    /// The caller guarantees `x` lies in the domain.
    pub fn active_into(&self, x: &[f64], out: &mut Vec<(usize, f64)>) -> f64 {
        out.clear();
        let three = 3.0 * self.net.radius;
        match &self.index {
            Some(idx) => {
                let mut ids = Vec::new();
                idx.neighbours(x, &mut ids);
                ids.sort_unstable();
                for k in ids {
                    let a = three - dist(x, &self.net.centers[k]);
                    if a > 0.0 {
                        out.push((k, a));
                    }
                }
            }
            None => {
                for (k, z) in self.net.centers.iter().enumerate() {
                    let a = three - dist(x, z);
                    if a > 0.0 {
                        out.push((k, a));
                    }
                }
            }
        }
        let total: f64 = out.iter().map(|p| p.1).sum();
        if total > 0.0 {
            for p in out.iter_mut() {
                p.1 /= total;
            }
        }
        total
    }

    /// Raw tents `α_k(x)`.
    pub fn alphas(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let three = 3.0 * self.net.radius;
        Ok(self.net.centers.iter().map(|z| (three - dist(x, z)).max(0.0)).collect())
    }

    /// Dense vector `(β_1(x), …, β_K(x))`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut act = Vec::new();
        let total = self.active_into(x, &mut act);
        if !(total > 0.0) {
            return Err(Error::OutsideDomain);
        }
        let mut out = vec![0.0; self.len()];
        for (k, b) in act {
            out[k] = b;
        }
        Ok(out)
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        if !self.net.domain.contains(x, 1e-9) {
            return Err(Error::OutsideDomain);
        }
        Ok(())
    }
}

/// Builds the partition of unity of a net.
pub fn partition_of_unity(net: Net) -> PartitionOfUnity {
    PartitionOfUnity::new(net)
}
