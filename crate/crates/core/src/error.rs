use thiserror::Error;

/// Errors raised by the model engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("supernumerary income {supernumerary} is not positive; no interior optimum exists")]
    NonInteriorBudget { supernumerary: f64 },

    #[error("relative price must be positive and finite, got {0}")]
    InvalidPrice(f64),

    #[error("share {0} lies outside [0, 1]")]
    ShareOutOfRange(f64),

    #[error("horizon must be at least 1 period")]
    InvalidHorizon,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("income elasticities require gamma_H = 0, got {0}")]
    GammaHNonzero(f64),

    #[error("no convergence after {iterations} iterations: {reason}")]
    NoConvergence { iterations: usize, reason: String },

    #[error("channel condition undefined: dH/ds vanishes at the fixed point (dT/dE = {dt_de})")]
    DegenerateChannel { dt_de: f64 },

    #[error("operation requires linear learning; cubic learning is not supported here")]
    SpecVariantUnsupported,
}

pub type Result<T> = std::result::Result<T, ModelError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
