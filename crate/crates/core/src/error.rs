use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("size mismatch: expected {expected} voxels, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("unsupported bit depth (max value {0})")]
    UnsupportedBitDepth(u32),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape exceeds image bounds: {0}")]
    OutOfBounds(String),
    #[error("point {0:?} lies outside the domain")]
    OutsideDomain([f64; 3]),
    #[error("degenerate gradient (|grad f| = {0:e})")]
    DegenerateGradient(f64),
    #[error("element {0} is already refined")]
    AlreadyRefined(usize),
    #[error("no sign change along the search segment")]
    NoBracket,
    #[error("nearest-point search did not converge")]
    NoConvergence,
    #[error("non-positive Jacobian in element {element} (det = {det:e})")]
    InvertedElement { element: usize, det: f64 },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Tag an error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
