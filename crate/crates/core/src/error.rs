use alloc::string::String;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported dimension {dimension}: grid covers need n <= {max}")]
    UnsupportedDimension { dimension: usize, max: usize },
    #[error("configuration error: {0}")]
    Config(String),
    /// A caller-supplied function broke its declared contract.
    #[error("contract violation: {0}")]
    Contract(String),
    /// An internal invariant failed; the run must be aborted.
    #[error("logic error: {0}")]
    Logic(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}

pub(crate) use invalid;
