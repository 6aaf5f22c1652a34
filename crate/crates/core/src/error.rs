use thiserror::Error;

use crate::model::{EstimatorId, ScenarioKind, ValidationReport};

/// Errors produced by the estimation, sampling and risk layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("validation failed: {0}")]
    Validation(ValidationReport),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("estimator `{estimator}` does not apply to the {kind} scenario")]
    EstimatorMismatch {
        estimator: EstimatorId,
        kind: ScenarioKind,
    },

    #[error("moment generating function diverges (c*p = {0} >= 1)")]
    MgfDivergence(f64),

    #[error("non-finite objective inside the search bracket [{lo}, {hi}]")]
    NonFiniteObjective { lo: f64, hi: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
