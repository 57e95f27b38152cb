use thiserror::Error;

/// Crate-wide error type.
///
/// `RegimeMismatch` is the interesting one: it is returned whenever a caller
/// asks for a bound or verification outside the hypothesis range it was
/// proved (or conjectured) for, and its message names the violated
/// inequality.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on raw arguments failed (e.g. even modulus for a
    /// Jacobi symbol, non-coprime inverse).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The parameters lie outside the hypothesis range of the requested
    /// theorem/conjecture; the message states the failed inequality.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    /// A sweep grid file failed validation; `field` is the offending key.
    #[error("invalid grid spec at `{field}`: {message}")]
    GridSpec { field: String, message: String },

    /// A checkpoint file does not belong to the grid being resumed, or is
    /// corrupt.
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn regime(msg: impl Into<String>) -> Self {
        Error::RegimeMismatch(msg.into())
    }
}
