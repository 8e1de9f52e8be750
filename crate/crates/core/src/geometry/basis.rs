//! Finite families of Lipschitz functions that approximate every weight
//! function in `W_L` by nonnegative combinations.

use serde::Serialize;

use super::domain::ConvexDomain;
use super::net::maximal_net_default;
use super::partition::PartitionOfUnity;
use crate::error::{check_dim, Error, Result};

/// Default hard cap on the number of basis members.
pub const DEFAULT_MAX_BASIS: usize = 10_000;

/// Coordinate functions `c ↦ c_j` followed by `Q` copies of `β_k / Q` per net center.
#[derive(Debug, Clone)]
pub struct BasisFamily {
    partition: PartitionOfUnity,
    lipschitz: f64,
    target_error: f64,
    replication: usize,
}

/// Serializable summary of a basis.
#[derive(Debug, Clone, Serialize)]
pub struct BasisDescription {
    pub centers: Vec<Vec<f64>>,
    pub net_radius: f64,
    pub lipschitz: f64,
    pub target_error: f64,
    pub d: usize,
    pub replication: usize,
}

/// Weights `ϖ` for a target function together with the measured sup error.
#[derive(Debug, Clone)]
pub struct Approximation {
    pub weights: Vec<f64>,
    pub max_error: f64,
}

fn inside_unit_cube(domain: &ConvexDomain) -> bool {
    domain.factors().iter().all(|f| match f {
        ConvexDomain::Box { lower, upper } => {
            lower.iter().all(|l| *l >= 0.0) && upper.iter().all(|u| *u <= 1.0)
        }
        _ => true,
    })
}

impl BasisFamily {
    /// Wraps a partition of unity with replication `Q`; `lipschitz` is the
    /// declared bound that every member satisfies.
    pub fn from_partition(partition: PartitionOfUnity, lipschitz: f64, target_error: f64, replication: usize) -> Result<Self> {
        if replication == 0 {
            return Err(Error::InvalidParameter("replication must be >= 1".into()));
        }
        if !inside_unit_cube(&partition.net().domain) {
            return Err(Error::InvalidParameter("basis domain must lie in the unit cube".into()));
        }
        Ok(Self { partition, lipschitz, target_error, replication })
    }

    /// Coordinates plus one copy of each `β_k`; the declared bound is the
    /// larger of 1 and the partition's Lipschitz bound.
    pub fn partition_basis(partition: PartitionOfUnity) -> Result<Self> {
        let l = partition.lipschitz_bound().max(1.0);
        let eps = 3.0 * partition.net().radius * l;
        Self::from_partition(partition, l, eps, 1)
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    /// Number of members `d = m + K Q`.
    pub fn len(&self) -> usize {
        self.dim() + self.partition.len() * self.replication
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn target_error(&self) -> f64 {
        self.target_error
    }

    pub fn replication(&self) -> usize {
        self.replication
    }

    pub fn partition(&self) -> &PartitionOfUnity {
        &self.partition
    }

    pub fn domain(&self) -> &ConvexDomain {
        &self.partition.net().domain
    }

    pub fn describe(&self) -> BasisDescription {
        BasisDescription {
            centers: self.partition.net().centers.clone(),
            net_radius: self.partition.net().radius,
            lipschitz: self.lipschitz,
            target_error: self.target_error,
            d: self.len(),
            replication: self.replication,
        }
    }

    /// Nonzero members at `c` as `(index, value)` pairs in increasing index order.
    /// `scratch` is reused for the partition evaluation.
    pub fn eval_sparse(&self, c: &[f64], scratch: &mut Vec<(usize, f64)>, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let m = self.dim();
        for (j, v) in c.iter().enumerate() {
            if *v != 0.0 {
                out.push((j, *v));
            }
        }
        self.partition.active_into(c, scratch);
        let q = self.replication;
        let inv = 1.0 / q as f64;
        for &(k, b) in scratch.iter() {
            for r in 0..q {
                out.push((m + k * q + r, b * inv));
            }
        }
    }

    /// Dense member values at a domain point.
    pub fn eval(&self, c: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), c.len())?;
        if !self.domain().contains(c, 1e-9) {
            return Err(Error::OutsideDomain);
        }
        let mut out = vec![0.0; self.len()];
        let (mut s, mut sp) = (Vec::new(), Vec::new());
        self.eval_sparse(c, &mut s, &mut sp);
        for (i, v) in sp {
            out[i] = v;
        }
        Ok(out)
    }

    /// `Σ_i ϖ_i f_i(c)`.
    pub fn combine(&self, weights: &[f64], c: &[f64]) -> Result<f64> {
        check_dim(self.len(), weights.len())?;
        Ok(self.eval(c)?.iter().zip(weights).map(|(f, w)| f * w).sum())
    }

    /// `ϖ_{k,q} = w(z_k)` on partition members and 0 on coordinate members,
    /// with the sup error measured on the probe lattice of resolution `ε/4`
    /// of the net radius.
    pub fn approximate_weights(&self, w: &dyn Fn(&[f64]) -> f64) -> Result<Approximation> {
        let net = self.partition.net();
        let m = self.dim();
        let q = self.replication;
        let mut weights = vec![0.0; self.len()];
        for (k, z) in net.centers.iter().enumerate() {
            let v = w(z);
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::WeightOutOfRange { value: v });
            }
            for r in 0..q {
                weights[m + k * q + r] = v;
            }
        }
        let probes = net.domain.lattice(net.radius / 4.0)?.points();
        let (mut s, mut sp) = (Vec::new(), Vec::new());
        let mut max_error: f64 = 0.0;
        for p in &probes {
            let target = w(p);
            if !(0.0..=1.0).contains(&target) {
                return Err(Error::WeightOutOfRange { value: target });
            }
            self.eval_sparse(p, &mut s, &mut sp);
            let approx: f64 = sp.iter().map(|(i, f)| weights[*i] * f).sum();
            max_error = max_error.max((approx - target).abs());
        }
        Ok(Approximation { weights, max_error })
    }
}

/// The basis of the approximation lemma: net radius `ε/(3L)`,
/// `Q = ⌈4^{m+2}/(ε_1 L)⌉` copies per center, capped at [`DEFAULT_MAX_BASIS`].
pub fn lipschitz_basis(domain: &ConvexDomain, lipschitz: f64, eps: f64) -> Result<BasisFamily> {
    lipschitz_basis_capped(domain, lipschitz, eps, DEFAULT_MAX_BASIS)
}

pub fn lipschitz_basis_capped(domain: &ConvexDomain, lipschitz: f64, eps: f64, cap: usize) -> Result<BasisFamily> {
    if !(lipschitz >= 1.0) {
        return Err(Error::InvalidParameter(format!("Lipschitz bound {lipschitz} must be >= 1")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("target error {eps} must lie in (0,1]")));
    }
    let m = domain.dim();
    let eps1 = eps / (3.0 * lipschitz);
    let q = replication_count(m, eps1, lipschitz);
    let net = maximal_net_default(domain, eps1)?;
    let d = m + net.len() * q;
    if d > cap {
        return Err(Error::BasisTooLarge { d, cap });
    }
    BasisFamily::from_partition(PartitionOfUnity::new(net), lipschitz, eps, q)
}

/// `Q = ⌈4^{m+2}/(ε_1 L)⌉`.
pub fn replication_count(m: usize, eps1: f64, lipschitz: f64) -> usize {
    (4f64.powi(m as i32 + 2) / (eps1 * lipschitz)).ceil() as usize
}
