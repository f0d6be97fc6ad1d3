use thiserror::Error;

use crate::assumptions::AssumptionReport;
use crate::singularity_data::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid datum: {0}")]
    Invalid(ValidationReport),
    #[error("hypotheses not satisfied: {0}")]
    Hypotheses(AssumptionReport),
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
