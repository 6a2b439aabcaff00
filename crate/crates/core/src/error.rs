use thiserror::Error;

/// Errors raised by kernel evaluation, linear algebra and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the set an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical-quality check failed (non-Hermitian input, negative Gram diagonal, ...).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// An experiment configuration could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
