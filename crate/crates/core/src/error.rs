use std::path::PathBuf;

/// Errors raised anywhere in the picking toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic: expected \"CIGR\", found {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported raster version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated header: {len} of 16 bytes")]
    TruncatedHeader { len: usize },

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("trailing data: {extra} bytes after payload")]
    TrailingData { extra: usize },

    #[error("raster dimensions {rows}x{cols} overflow")]
    DimensionOverflow { rows: u64, cols: u64 },

    #[error("invalid dimensions {rows}x{cols}: {reason}")]
    InvalidDims {
        rows: usize,
        cols: usize,
        reason: &'static str,
    },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("value {value} at index {index} outside accepted range")]
    ValueOutOfRange { index: usize, value: f64 },

    #[error("malformed curve record at line {line}: {reason}")]
    MalformedRecord { line: u64, reason: String },

    #[error("curve {curve_id}: offset {offset} does not increase (line {line})")]
    NonMonotoneOffsets {
        curve_id: u32,
        offset: u32,
        line: u64,
    },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
