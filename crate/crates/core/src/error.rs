use std::path::PathBuf;

/// Errors produced by every fallible operation in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt image data: {0}")]
    CorruptData(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("dimensions {height}x{width} are not divisible by {factor}")]
    DimensionNotDivisible {
        height: usize,
        width: usize,
        factor: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("odd dimensions {height}x{width}")]
    OddDimensions { height: usize, width: usize },

    #[error("image too small: {0}")]
    ImageTooSmall(String),

    #[error("pyramid depth {depth} too large for {height}x{width} (base must stay at least 8x8)")]
    DepthTooLarge {
        depth: usize,
        height: usize,
        width: usize,
    },

    #[error("spectrum is not conjugate symmetric (imaginary residue {0:e})")]
    AsymmetricSpectrum(f64),

    #[error("invalid schedule config: {0}")]
    InvalidConfig(String),

    #[error("epoch {got} out of order (expected {expected})")]
    EpochOutOfOrder { expected: usize, got: usize },

    #[error("loss became non-finite at step {step}; learning rate too large?")]
    NonFiniteLoss { step: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Whether the error is caused by the shape or content of input data
    /// (as opposed to configuration or usage).
    pub fn is_data_error(&self) -> bool {
        !matches!(
            self,
            Error::InvalidConfig(_) | Error::InvalidArgument(_) | Error::EpochOutOfOrder { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
