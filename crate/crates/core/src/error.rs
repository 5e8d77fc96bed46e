use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("domain error at {location}: {reason}")]
    Domain { location: String, reason: String },

    #[error("non-finite value {value} returned by the integrand at x = {x}")]
    Evaluation { x: f64, value: f64 },

    #[error("Mehler kernel is singular at s = {s}: the transition measure is a point mass")]
    SingularKernel { s: f64 },

    #[error("consistency check `{check}` failed: discrepancy {discrepancy:e} at x = {x}")]
    Consistency {
        check: &'static str,
        x: f64,
        discrepancy: f64,
    },
}

impl Error {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(location: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Domain {
            location: location.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
