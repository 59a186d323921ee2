use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("polynomial {poly:#x} is not primitive for GF(2^{m})")]
    NotPrimitive { m: u32, poly: u32 },

    #[error("invalid base {found:?} at position {position}")]
    InvalidBase { position: usize, found: char },

    #[error("strand length mismatch: expected {expected} bases, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("strand index {index} out of range (K = {columns})")]
    InvalidIndex { index: usize, columns: usize },

    #[error("payload of {requested} bits exceeds capacity of {capacity} bits")]
    Capacity { requested: usize, capacity: usize },

    #[error("malformed directory at byte offset {offset}: {reason}")]
    Directory { offset: usize, reason: String },

    #[error("image decode failed: {0}")]
    Image(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
