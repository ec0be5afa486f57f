//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point has non-positive depth in camera frame (z = {z})")]
    BehindCamera { z: f64 },

    #[error("rays are near-parallel (|dot| = {dot})")]
    Parallel { dot: f64 },

    #[error("triangulation needs at least 2 views, got {views}")]
    InsufficientViews { views: usize },

    #[error("shape mismatch: expected {expected_h}x{expected_w}, got {got_h}x{got_w}")]
    ShapeMismatch {
        expected_h: usize,
        expected_w: usize,
        got_h: usize,
        got_w: usize,
    },

    #[error("objective returned a non-finite value at {at:?}")]
    NonFiniteObjective { at: Vec<f64> },

    #[error("scene has no centers to optimize")]
    EmptyScene,

    #[error("mesh has no vertices")]
    EmptyMesh,

    #[error("object placement failed after {attempts} rejection-sampling attempts")]
    PlacementFailed { attempts: usize },

    #[error("invalid mesh dimensions: {what}")]
    InvalidDimensions { what: String },

    #[error("malformed file {path}: {what}")]
    MalformedFile { path: String, what: String },

    #[error("validation failed: {what}")]
    Validation { what: String },

    #[error("unknown file format version {found} (supported: {supported})")]
    UnknownVersion { found: u32, supported: u32 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
