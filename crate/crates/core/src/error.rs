use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// The variants mirror the failure classes callers need to tell apart: bad
/// inputs, numerical routines that did not converge, and distributions whose
/// small-energy singularity is not integrable.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("numerical failure: {message} (error estimate {estimate:e})")]
    Numeric { message: String, estimate: f64 },

    #[error("eigensolver did not converge: {message} (accuracy estimate {estimate:e})")]
    Convergence { message: String, estimate: f64 },

    #[error("non-integrable singularity at zero energy (fitted exponent {exponent})")]
    Integrability { exponent: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, estimate: f64) -> Self {
        Error::Numeric { message: msg.into(), estimate }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
