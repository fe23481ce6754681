//! Crate-wide error type.

use crate::adaptive::StepRecord;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A linear solve or eigendecomposition failed numerically.
    #[error("numeric failure: {what}")]
    NumericFailure { what: String, dt: Option<f64> },

    /// The adaptive stepper exhausted its reject budget on one step.
    #[error("step failure at t = {t}: {what}")]
    StepFailure {
        t: f64,
        what: String,
        records: Vec<StepRecord>,
    },

    /// Run-configuration parse or validation error.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn numeric(what: impl Into<String>) -> Self {
        Error::NumericFailure {
            what: what.into(),
            dt: None,
        }
    }

    pub fn numeric_at(what: impl Into<String>, dt: f64) -> Self {
        Error::NumericFailure {
            what: what.into(),
            dt: Some(dt),
        }
    }

    pub fn invalid(what: impl Into<String>) -> Self {
        Error::InvalidArgument(what.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) => 2,
            Error::NumericFailure { .. } | Error::StepFailure { .. } => 3,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
