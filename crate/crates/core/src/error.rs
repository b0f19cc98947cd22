use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} = {value} lies below the barrier {barrier}")]
    BelowBarrier {
        what: &'static str,
        value: f64,
        barrier: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("integration failed on path {path} at step {step}: non-finite state")]
    Integration { path: usize, step: usize },

    #[error("path {path} diverged at step {step} (state {value})")]
    Diverged { path: usize, step: usize, value: f64 },

    #[error("degenerate likelihood: {0}")]
    DegenerateLikelihood(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parameter,
    Data,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. } => ErrorKind::Parameter,
            Error::BelowBarrier { .. } | Error::Domain(_) | Error::InsufficientData(_) => {
                ErrorKind::Data
            }
            Error::Integration { .. }
            | Error::Diverged { .. }
            | Error::DegenerateLikelihood(_)
            | Error::NoConvergence(_) => ErrorKind::Numerical,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Fails unless `value` is finite and strictly positive.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::param(name, alloc::format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::param(name, alloc::format!("must be finite and >= 0, got {value}")))
    }
}

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::param(name, alloc::format!("must be finite, got {value}")))
    }
}
