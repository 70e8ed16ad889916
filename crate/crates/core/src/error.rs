use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed Y4M header: {0}")]
    Y4mHeader(String),
    #[error("unsupported colorspace `{0}` (only 4:2:0 is handled)")]
    UnsupportedColorspace(String),
    #[error("truncated frame payload: frame {frame} needs {needed} bytes, {available} available")]
    TruncatedFrame {
        frame: usize,
        needed: usize,
        available: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid dimensions {width}x{height}: {reason}")]
    InvalidDimensions {
        width: usize,
        height: usize,
        reason: &'static str,
    },
    #[error("operator set produced a malformed tensor: {0}")]
    OperatorShape(String),
    #[error("bitstream truncated")]
    Truncated,
    #[error("malformed bitstream: {0}")]
    Malformed(String),
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported bitstream version {0}")]
    Version(u8),
    #[error("reference index {index} out of range for list of {len}")]
    RefIndex { index: usize, len: usize },
    #[error("missing reference POC {0}")]
    MissingReference(u32),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("window not complete: {0}")]
    WindowIncomplete(String),
    #[error("buffer purity violated: {0}")]
    BufferPurity(String),
    #[error("invalid RD curve: {0}")]
    Curve(String),
    #[error("malformed trace: {0}")]
    Trace(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
