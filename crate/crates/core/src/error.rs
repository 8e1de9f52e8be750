use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point lies outside the domain")]
    OutsideDomain,

    #[error("probe grid too coarse: covering radius {radius} exceeds {limit}")]
    CoarseProbeGrid { radius: f64, limit: f64 },

    #[error("basis size {d} exceeds the hard cap {cap}")]
    BasisTooLarge { d: usize, cap: usize },

    #[error("weight function value {value} outside [0,1]")]
    WeightOutOfRange { value: f64 },

    #[error("observation violates a declared bound: {0}")]
    BoundViolation(String),

    #[error("action outside the admissible set")]
    ActionOutsideSet,

    #[error("fixed-point residual {residual:e} above coarse tolerance {tolerance:e}")]
    FixedPoint { residual: f64, tolerance: f64 },

    #[error("period {period}: {source}")]
    AtPeriod { period: usize, source: Box<Error> },

    #[error("best-reply set not convex: {0}")]
    QuasiConcavity(String),

    #[error("empty transcript")]
    EmptyTranscript,

    #[error("no grid profile is an epsilon-equilibrium (scanned {scanned})")]
    NoGridEquilibrium { scanned: usize },

    #[error("numeric overflow: {0}")]
    Overflow(String),
}

impl Error {
    /// Period at which a run aborted, if known.
    pub fn period(&self) -> Option<usize> {
        match self {
            Error::AtPeriod { period, .. } => Some(*period),
            _ => None,
        }
    }

    pub(crate) fn at(self, period: usize) -> Error {
        match self {
            Error::AtPeriod { .. } => self,
            other => Error::AtPeriod { period, source: Box::new(other) },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
