use thiserror::Error;

/// Errors raised by the numerical routines and the command-line front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input `{field}`: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("pole of {function} at {at}")]
    Pole { function: &'static str, at: String },

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("quadrature did not reach tolerance {requested:e} (achieved {achieved:e})")]
    Accuracy { achieved: f64, requested: f64 },

    #[error("degenerate pole: {0}")]
    DegeneratePole(String),

    #[error("unsupported polygamma order {0} (only non-negative integers)")]
    UnsupportedOrder(f64),

    #[error("no convergence up to Pade order {order}; best relative error {best_error:e}")]
    ConvergenceFailure { order: usize, best_error: f64 },

    #[error("alpha(0) is zero; cannot derive a starting amplitude")]
    ZeroAmplitude,

    #[error("invalid series: {0}")]
    InvalidSeries(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
