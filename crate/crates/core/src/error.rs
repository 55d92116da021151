use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: expected length {expected}, got {actual}")]
    Size { expected: usize, actual: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid hyperparameters: {0}")]
    Parameter(String),

    /// A dictionary atom is invisible to the data, so no sensitivity weight exists.
    #[error("column {index} of the forward dictionary has zero norm")]
    DegenerateColumn { index: usize },

    #[error("classification failed: {0}")]
    Classification(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

pub(crate) fn check_len(actual: usize, expected: usize) -> Result<()> {
    if actual != expected {
        return Err(Error::Size { expected, actual });
    }
    Ok(())
}
