//! Domains, projections, nets, partitions of unity, Lipschitz bases and
//! Lipschitz approximate best replies.

mod basis;
mod best_reply;
mod domain;
mod net;
mod partition;

pub use basis::{
    lipschitz_basis, lipschitz_basis_capped, replication_count, Approximation, BasisDescription, BasisFamily,
    DEFAULT_MAX_BASIS,
};
pub use best_reply::{nu, smooth_best_reply, BestReplyOracle, SmoothBestReply};
pub use domain::{lex_cmp, project_simplex, ConvexDomain, Lattice, LatticeFactor};
pub use net::{maximal_net, maximal_net_default, Net};
pub use partition::{partition_of_unity, PartitionOfUnity};
