use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("intensity {value} at t={t} exceeds the Bell parameter cap {cap}")]
    ThetaCapExceeded { t: usize, value: f64, cap: f64 },

    #[error("non-stationary specification: sum of coefficients {persistence} >= 1")]
    NonStationary { persistence: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("operation requires a {expected} link")]
    WrongLink { expected: &'static str },

    #[error("closed form undefined: {0}")]
    Undefined(&'static str),

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("point lies within {margin} of the feasible boundary")]
    TooCloseToBoundary { margin: f64 },

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("series is not overdispersed (v1 = {v1:?}, v2 = {v2:?})")]
    NotOverdispersed { v1: Option<f64>, v2: Option<f64> },

    #[error("all {replications} replications failed to converge")]
    AllReplicationsFailed { replications: usize },
}
