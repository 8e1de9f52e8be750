//! Calibrated learning in games: smooth calibrated learning on finite games,
//! the continuous-action variant and the exhaustive-search baseline.

mod continuous;
mod exhaustive;
mod finite;
mod learning;
mod schedule;

pub use continuous::{run_continuous_dynamic, ContinuousConfig, ContinuousGame, ContinuousPlayer, ContinuousRun};
pub use exhaustive::{run_exhaustive_search, SearchRun, SearchStep};
pub use finite::{eps_nash_check, FiniteGame, FinitePlayer, NashCheck};
pub use learning::{best_replies, run_smooth_calibrated_learning, Diagnostics, DynamicConfig, DynamicsRun, Step};
pub use schedule::{tune_dynamic_parameters, DynamicSchedule};
