//! Error type shared across the crate.

/// Errors carry enough context to map onto the CLI exit codes: invalid
/// input and oversized oracle requests (exit 1), audit failures (exit 2),
/// oracle breakdowns and I/O problems (exit 3).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Parameter or config rejected before any computation ran.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A dense-oracle request exceeded the configured size limit.
    #[error("system size {requested} exceeds the dense-oracle limit {limit}")]
    OracleLimit { requested: usize, limit: usize },

    /// The dense eigensolver failed to converge or produced an eigenpair
    /// whose residual exceeds the oracle's guarantee.
    #[error("dense oracle failure: {0}")]
    OracleFailure(String),

    /// A verification pass found a violation of a bound it audits.
    #[error("audit failure: {0}")]
    AuditFailure(String),

    /// File or serialization problem while reading configs or writing
    /// results.
    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
