use thiserror::Error;

/// Errors produced by the analysis and simulation routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: need at least {needed}, got {got} ({what})")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("no extreme events: no row exceeds the thresholds")]
    NoExtremeEvents,

    #[error("generalized Pareto fit failed after {iterations} iterations: {reason} (sigma={sigma}, xi={xi}, nll={nll})")]
    FitFailure {
        reason: String,
        iterations: usize,
        sigma: f64,
        xi: f64,
        nll: f64,
    },

    #[error("non-identifiable: largest Wasserstein distance is {max_w1}")]
    NonIdentifiable { max_w1: f64 },

    #[error("graph has a cycle through node {0}")]
    CyclicGraph(usize),

    #[error("importance weights too heavy: effective sample size {ess:.1} below {required:.1}; increase pool_factor or the Gumbel scale")]
    HeavyWeights { ess: f64, required: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Whether the error comes from a numerical procedure rather than from
    /// malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::FitFailure { .. } | Error::NonIdentifiable { .. } | Error::HeavyWeights { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
