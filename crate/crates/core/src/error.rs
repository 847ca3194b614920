use thiserror::Error;

/// Errors produced by the estimators, the simulation harness and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The dataset has no observed subjects, so the method cannot be applied.
    #[error("no observed data")]
    NoObservedData,

    /// The method produced no usable interval for this dataset
    /// (e.g. log-odds on a boundary count when boundary handling is `Undefined`).
    #[error("method undefined: {0}")]
    Undefined(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("length mismatch: {0} estimates vs {1} variances")]
    LengthMismatch(usize, usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors that mark a single replicate as method-undefined rather
    /// than aborting a simulation.
    pub fn is_undefined(&self) -> bool {
        matches!(self, Error::NoObservedData | Error::Undefined(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
