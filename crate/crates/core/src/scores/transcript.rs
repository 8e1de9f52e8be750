use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::ConvexDomain;

/// Time-ordered `(c_t, a_t)` pairs stored as two flat row-major arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    domain: ConvexDomain,
    forecasts: Vec<f64>,
    actions: Vec<f64>,
}

/// Distinct forecast value with its count and summed actions.
#[derive(Debug, Clone)]
pub(crate) struct Group {
    pub c: Vec<f64>,
    pub n: f64,
    pub a_sum: Vec<f64>,
}

const DOMAIN_TOL: f64 = 1e-12;

impl Transcript {
    pub fn new(domain: ConvexDomain) -> Self {
        Self { domain, forecasts: Vec::new(), actions: Vec::new() }
    }

    pub fn from_pairs(domain: ConvexDomain, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<Self> {
        let mut t = Self::new(domain);
        for (c, a) in pairs {
            t.push(c, a)?;
        }
        Ok(t)
    }

    /// Scalar convenience for `m = 1`.
    pub fn from_scalars(domain: ConvexDomain, pairs: &[(f64, f64)]) -> Result<Self> {
        let mut t = Self::new(domain);
        for (c, a) in pairs {
            t.push(&[*c], &[*a])?;
        }
        Ok(t)
    }

    pub fn push(&mut self, c: &[f64], a: &[f64]) -> Result<()> {
        let m = self.domain.dim();
        check_dim(m, c.len())?;
        check_dim(m, a.len())?;
        if !self.domain.contains(c, DOMAIN_TOL) || !self.domain.contains(a, DOMAIN_TOL) {
            return Err(Error::OutsideDomain);
        }
        self.forecasts.extend_from_slice(c);
        self.actions.extend_from_slice(a);
        Ok(())
    }

    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn len(&self) -> usize {
        self.forecasts.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.forecasts.is_empty()
    }

    /// Forecast of period `t` (0-based).
    pub fn forecast(&self, t: usize) -> &[f64] {
        let m = self.dim();
        &self.forecasts[t * m..(t + 1) * m]
    }

    pub fn action(&self, t: usize) -> &[f64] {
        let m = self.dim();
        &self.actions[t * m..(t + 1) * m]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        let m = self.dim();
        self.forecasts.chunks_exact(m).zip(self.actions.chunks_exact(m))
    }

    /// First `n` periods.
    pub fn prefix(&self, n: usize) -> Transcript {
        let m = self.dim();
        let n = n.min(self.len());
        Transcript {
            domain: self.domain.clone(),
            forecasts: self.forecasts[..n * m].to_vec(),
            actions: self.actions[..n * m].to_vec(),
        }
    }

    /// Periods `from..to`.
    pub fn slice(&self, from: usize, to: usize) -> Transcript {
        let m = self.dim();
        let to = to.min(self.len());
        let from = from.min(to);
        Transcript {
            domain: self.domain.clone(),
            forecasts: self.forecasts[from * m..to * m].to_vec(),
            actions: self.actions[from * m..to * m].to_vec(),
        }
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyTranscript)
        } else {
            Ok(())
        }
    }

    /// Groups periods by bitwise-equal forecasts, in order of first appearance.
    pub(crate) fn groups(&self) -> Vec<Group> {
        let m = self.dim();
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut groups: Vec<Group> = Vec::new();
        for (c, a) in self.iter() {
            let key: Vec<u64> = c.iter().map(|v| v.to_bits()).collect();
            let g = *index.entry(key).or_insert_with(|| {
                groups.push(Group { c: c.to_vec(), n: 0.0, a_sum: vec![0.0; m] });
                groups.len() - 1
            });
            let grp = &mut groups[g];
            grp.n += 1.0;
            for (s, x) in grp.a_sum.iter_mut().zip(a) {
                *s += x;
            }
        }
        groups
    }
}
