//! Deterministic smoothly calibrated forecasting.
//!
//! The crate provides the windowed discounted forward regression algorithm,
//! the calibration score family, a finite-recall grid-valued weakly
//! calibrated forecaster, the calibration game, and calibrated learning
//! dynamics for finite and continuous games.

pub mod dynamics;
pub mod error;
pub mod forecaster;
pub mod game;
pub mod geometry;
pub mod linalg;
pub mod regression;
pub mod rng;
pub mod scores;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/regression.md")]
    mod regression {}
    #[doc = include_str!("../../../book/src/scores.md")]
    mod scores {}
    #[doc = include_str!("../../../book/src/forecaster.md")]
    mod forecaster {}
    #[doc = include_str!("../../../book/src/game.md")]
    mod game {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
