//! Error type shared by all modules.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Decoder error classes. Each class maps to a distinct CLI exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Underlying I/O failure (missing file, short read, ...).
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed container, packet, or codebook file.
    #[error("format error: {0}")]
    Format(String),

    /// Structurally valid input that violates a contract (bad shape,
    /// inconsistent config, missing tensor, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A packet field exceeds its coded bit width.
    #[error("{field} out of range: {value} exceeds maximum {max}")]
    Range {
        field: &'static str,
        value: u64,
        max: u64,
    },
}

impl Error {
    /// A malformed-input error: the bytes don't parse as the format.
    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    /// A consistency error: well-formed input that violates a contract.
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
