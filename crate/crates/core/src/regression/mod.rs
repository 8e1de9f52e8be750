//! Online linear regression: the forward algorithm, its `λ`-discounted
//! variant, and the `R`-windowed discounted variant, with regret tracking,
//! constant tuning and the block expansion that reduces discounting to the
//! plain forward algorithm.

mod block;
mod data;
mod regressor;
mod regret;
mod tuning;

pub use block::block_expand;
pub use data::{DataGenerator, DataKind};
pub use regressor::{loss, Observation, Prediction, Regressor, RegressorParams, Variant, WindowMaintenance};
pub use regret::{default_maintenance, regret_report, theta_grid, RegretReport, RegretTracker};
pub use tuning::{d1, d2, tune_parameters, windowed_regret_rhs, TunedParameters};
