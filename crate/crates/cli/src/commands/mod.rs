pub mod calibrate;
mod common;
pub mod dynamics;
pub mod regress;
pub mod score;
pub mod selftest;

pub use calibrate::CalibrateParams;
pub use dynamics::DynamicsParams;
pub use regress::RegressParams;
pub use score::ScoreParams;
pub use selftest::SelftestParams;

use serde_json::{json, Value};

use crate::cli::Context;

/// `config` block of a summary: the shared settings plus resolved parameters.
pub fn config_block(ctx: &Context, params: Value) -> Value {
    json!({
        "seed": ctx.seed,
        "profile": ctx.profile,
        "out": ctx.out.display().to_string(),
        "params": params,
    })
}
