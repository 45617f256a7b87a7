use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("trivial action: {0}")]
    TrivialAction(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("line {line}: {inner}")]
    AtLine { line: usize, inner: Box<Error> },
}

impl Error {
    pub fn at_line(self, line: usize) -> Self {
        Error::AtLine { line, inner: Box::new(self) }
    }

    /// The innermost error, with line context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLine { inner, .. } => inner.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
