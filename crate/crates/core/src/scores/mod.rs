//! Calibration scores, smoothing kernels and weight functions.

mod kernel;
mod score;
mod transcript;
mod weight;

pub use kernel::SmoothingKernel;
pub use score::{
    averaging_bound, calibration_score, conversion_constants, gamma, indicator_sup_bound, smoothed_averages,
    smoothed_score, smoothed_scores, weak_score, AveragingBound, Conversion, ConversionDirection, SmoothedPoint,
    SmoothedVariant,
};
pub use transcript::Transcript;
pub use weight::WeightFunction;
