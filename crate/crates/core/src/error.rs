use thiserror::Error;

/// Errors raised while decoding a PGM stream.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PgmError {
    #[error("bad magic number (expected P2 or P5)")]
    BadMagic,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),
    #[error("zero image dimension ({width}x{height})")]
    ZeroDimension { width: usize, height: usize },
    #[error("truncated pixel data: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("invalid ASCII sample {0:?}")]
    BadSample(String),
}

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("image dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("pixel buffer has {actual} samples, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
    #[error("pixel ({row}, {col}) is outside a {width}x{height} image")]
    OutOfBounds {
        row: usize,
        col: usize,
        width: usize,
        height: usize,
    },
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error(transparent)]
    Pgm(#[from] PgmError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A parameter bundle violated its documented range.
#[derive(Debug, Error, PartialEq)]
#[error("invalid parameter `{name}`: {reason}")]
pub struct ParamError {
    pub name: &'static str,
    pub reason: String,
}

impl ParamError {
    pub(crate) fn new(name: &'static str, reason: impl Into<String>) -> Self {
        Self {
            name,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum PsoError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("fitness is not finite at position [{:.6}, {:.6}, {:.6}]", .position[0], .position[1], .position[2])]
    NonFiniteFitness { position: [f64; 3] },
    #[error(transparent)]
    Image(#[from] ImageError),
}
