use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{what} exceeds the enumeration cutoff {limit}")]
    CutoffExceeded { what: String, limit: u64 },
    #[error("prime {0} is a bad prime for this curve")]
    BadPrime(u64),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("numerically indeterminate: {0}")]
    Indeterminate(String),
    #[error("internal assertion failed: {0}")]
    Assertion(String),
    #[error("cache file: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Indeterminate(_) => 2,
            Error::Assertion(_) => 3,
            _ => 1,
        }
    }
}
