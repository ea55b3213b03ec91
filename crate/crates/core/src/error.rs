use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside the domain an operation accepts.
    #[error("input outside domain: {0}")]
    Domain(String),

    /// The operation only supports a specific alphabet size.
    #[error("unsupported alphabet size {found}, expected {expected}")]
    UnsupportedAlphabet { found: usize, expected: usize },

    /// Exhaustive computation would exceed the supported size.
    #[error("instance too large: {0}")]
    TooLarge(String),

    /// An ensemble or experiment configuration is unusable.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Floating-point cancellation produced a clearly negative variance.
    #[error("negative component variance {value:e} at mask {mask:#x}")]
    NegativeVariance { mask: u32, value: f64 },

    /// A file or string could not be parsed.
    #[error("malformed input: {0}")]
    Format(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
