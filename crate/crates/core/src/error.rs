use thiserror::Error;

/// Failures raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical self-check exceeded its tolerance.
    #[error("numerical accuracy: {what} (residual {residual:.3e} > {tolerance:.3e})")]
    Accuracy {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    /// The eigensolver did not converge or produced an inconsistent decomposition.
    #[error("eigensolver failure: {0}")]
    Eigen(String),

    /// An exact state-vector construction would exceed the configured dimension.
    #[error("capacity exceeded: dimension {dimension} > limit {limit}")]
    Capacity { dimension: usize, limit: usize },

    /// An internal invariant of a simulation pipeline was violated.
    #[error("internal consistency: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

impl Error {
    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Accuracy { .. } => "accuracy",
            Error::Eigen(_) => "eigen",
            Error::Capacity { .. } => "capacity",
            Error::Consistency(_) => "consistency",
        }
    }
}
