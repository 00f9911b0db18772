use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid floating-point format: {0}")]
    InvalidFormat(String),

    #[error("invalid parameter for {family}: {reason}")]
    InvalidParameter { family: &'static str, reason: String },

    #[error("zero has no representation in the format")]
    ZeroInput,

    #[error("value {0} lies outside the granular region")]
    OutsideGranularRegion(f64),

    #[error("non-finite input: {0}")]
    NonFinite(f64),

    #[error("{component}: quadrature did not converge (estimate {estimate:e}, achieved error {achieved:e})")]
    Quadrature {
        component: &'static str,
        estimate: f64,
        achieved: f64,
    },

    #[error("pole of {function} at {x}")]
    Pole { function: &'static str, x: f64 },

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("{0} bound requires a unimodal density")]
    NotUnimodal(&'static str),

    #[error("too many bins for per-bin analysis: K = {k} exceeds {limit}")]
    TooManyBins { k: u64, limit: u64 },

    #[error("{0}")]
    Unsupported(String),

    #[error("cannot parse distribution '{input}': {reason}")]
    Parse { input: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
