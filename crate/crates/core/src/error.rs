use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("stationary cumulants of order {required} required, only {available} available")]
    InsufficientCumulants { required: usize, available: usize },

    #[error("moment order {required} exceeds the precomputed table limit {limit}")]
    OrderTooHigh { required: usize, limit: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("series too short for estimation: n = {n}, need at least {min}")]
    SeriesTooShort { n: usize, min: usize },

    #[error("series has no initial variance V0")]
    MissingInitialVariance,

    #[error("estimating equations have no solution: {0}")]
    Degenerate(String),

    #[error("matrix is singular")]
    Singular,

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
