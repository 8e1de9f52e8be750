//! Lipschitz approximate best-reply maps `g^i(c) = Σ_k β_k(c) x_k^i`.

use std::ops::Range;

use super::domain::ConvexDomain;
use super::net::maximal_net_default;
use super::partition::PartitionOfUnity;
use crate::error::{Error, Result};
use crate::linalg::norm;

/// What a single player knows about the game: its own payoff only.
pub trait BestReplyOracle {
    /// Coordinates of the player's own action inside a joint point.
    fn block(&self) -> Range<usize>;
    /// An exact best reply to `z^{-i}`: the lexicographically-first
    /// maximizing pure action, or a grid argmax for continuous games.
    fn best_reply(&self, z: &[f64]) -> Vec<f64>;
    /// `u^i(y, z^{-i})`.
    fn payoff(&self, own: &[f64], z: &[f64]) -> f64;
    /// Largest payoff over pure own actions against `z^{-i}`.
    fn best_value(&self, z: &[f64]) -> f64;
}

/// `g^i` for one player over a shared partition of unity.
#[derive(Debug, Clone)]
pub struct SmoothBestReply {
    partition: PartitionOfUnity,
    block: Range<usize>,
    replies: Vec<Vec<f64>>,
}

impl SmoothBestReply {
    /// Net radius `ε/(6L)` as in the construction; `lipschitz` bounds the payoff.
    pub fn new(oracle: &dyn BestReplyOracle, domain: &ConvexDomain, eps: f64, lipschitz: f64) -> Result<Self> {
        if !(eps > 0.0 && lipschitz > 0.0) {
            return Err(Error::InvalidParameter("eps and payoff Lipschitz bound must be positive".into()));
        }
        let net = maximal_net_default(domain, eps / (6.0 * lipschitz))?;
        Ok(Self::with_partition(oracle, PartitionOfUnity::new(net)))
    }

    /// Uses an existing partition (desk nets are coarser than the construction's).
    pub fn with_partition(oracle: &dyn BestReplyOracle, partition: PartitionOfUnity) -> Self {
        let replies = partition.net().centers.iter().map(|z| oracle.best_reply(z)).collect();
        Self { partition, block: oracle.block(), replies }
    }

    pub fn block(&self) -> Range<usize> {
        self.block.clone()
    }

    pub fn partition(&self) -> &PartitionOfUnity {
        &self.partition
    }

    pub fn center_replies(&self) -> &[Vec<f64>] {
        &self.replies
    }

    /// Writes `g^i(c)` into `out` (length of the player's block).
    pub fn eval_into(&self, c: &[f64], scratch: &mut Vec<(usize, f64)>, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        self.partition.active_into(c, scratch);
        for &(k, b) in scratch.iter() {
            for (o, x) in out.iter_mut().zip(&self.replies[k]) {
                *o += b * x;
            }
        }
    }

    pub fn eval(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.block.len()];
        self.eval_into(c, &mut Vec::new(), &mut out);
        out
    }

    /// `sup_c [max_b u^i(b, c^{-i}) − u^i(g^i(c), c^{-i})]` over `probes`.
    pub fn max_gap(&self, oracle: &dyn BestReplyOracle, probes: &[Vec<f64>]) -> f64 {
        probes
            .iter()
            .map(|c| oracle.best_value(c) - oracle.payoff(&self.eval(c), c))
            .fold(0.0, f64::max)
    }

    /// Errors when some probe leaves the `ε`-best-reply set.
    pub fn check_best_replies(&self, oracle: &dyn BestReplyOracle, probes: &[Vec<f64>], eps: f64) -> Result<()> {
        for c in probes {
            let gap = oracle.best_value(c) - oracle.payoff(&self.eval(c), c);
            if gap > eps {
                return Err(Error::QuasiConcavity(format!("gap {gap:.3e} > {eps:.3e} at {c:?}")));
            }
        }
        Ok(())
    }

    /// The construction's bound `Σ_k ||x_k|| · 4^{m+2}/ε_1` on `L(g^i)`.
    pub fn lipschitz_bound(&self) -> f64 {
        let l = self.partition.lipschitz_bound();
        self.replies.iter().map(|x| norm(x) * l).sum()
    }
}

/// `ν_m = √m^{m+1} · 4^{m+2} · 6^{m+1}`; an upper-bound constant only.
pub fn nu(m: usize) -> f64 {
    let mf = m as f64;
    mf.sqrt().powf(mf + 1.0) * 4f64.powf(mf + 2.0) * 6f64.powf(mf + 1.0)
}

/// Builds `g^i` and, for continuous games, spot-checks that every probe
/// image stays in the `ε`-best-reply set.
pub fn smooth_best_reply(oracle: &dyn BestReplyOracle, domain: &ConvexDomain, eps: f64, lipschitz: f64) -> Result<SmoothBestReply> {
    let g = SmoothBestReply::new(oracle, domain, eps, lipschitz)?;
    Ok(g)
}
