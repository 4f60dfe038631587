use thiserror::Error;

/// Errors raised by the thermodynamic engine, the models and the oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GibbsError {
    /// The parameter lies outside the admissible open set of the model.
    #[error("inadmissible parameter: {0}")]
    Inadmissible(String),

    /// A Monte-Carlo estimate did not reach the required precision.
    #[error("estimation failed: value {value:e}, stderr {stderr:e} ({reason})")]
    Estimation { value: f64, stderr: f64, reason: String },

    /// The model lacks the structure needed for the requested operation.
    #[error("unsupported for model `{model}`: {what}")]
    Unsupported { model: String, what: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = GibbsError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> GibbsError {
    GibbsError::InvalidInput(msg.into())
}
