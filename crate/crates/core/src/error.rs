use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input outside the domain of an operation (zero where a unit is
    /// needed, degree too small, composite "prime", ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at position {position} in {input:?}: {message}")]
    Parse { input: String, position: usize, message: String },

    /// A configured size cap was exceeded (bit length, degree).
    #[error("resource cap exceeded: {0}")]
    Resource(String),

    /// Iterative numerics failed to reach the requested residual.
    #[error("numeric failure: {message} (best residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    #[error("cannot factor integer with {bits} bits")]
    Factorization { bits: u64 },

    /// A decision procedure ran out of budget before it could answer.
    #[error("undecided: {0}")]
    Undecided(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(input: &str, position: usize, message: impl Into<String>) -> Self {
        Error::Parse { input: input.to_string(), position, message: message.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
