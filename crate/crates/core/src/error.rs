//! Error type shared across the crate.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed file content. `offset` is a byte offset for binary formats
    /// and a 1-based line number for text formats.
    #[error("parse error in {path} at {unit} {offset}: {message}")]
    Parse {
        path: PathBuf,
        offset: u64,
        unit: &'static str,
        message: String,
    },

    #[error("unsupported format for {path}: {message}")]
    UnsupportedFormat { path: PathBuf, message: String },

    #[error("face {face} references vertex {index} but the mesh has only {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },

    #[error("degenerate (zero-area) faces: {0:?}")]
    DegenerateFaces(Vec<usize>),

    #[error("length mismatch: expected {expected} records, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value at record {index}")]
    NonFinite { index: usize },

    #[error("{what} out of range at record {index}: {value}")]
    OutOfRange {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("vertex {vertex}: accumulated normal has zero norm")]
    ZeroNormal { vertex: usize },

    #[error("vertex {vertex}: singular chart Gram matrix on an unmasked vertex")]
    SingularGram { vertex: usize },

    #[error("mesh is not a closed oriented sphere (chi = {euler}, manifold = {manifold}, oriented = {oriented})")]
    NotSpherical {
        euler: i64,
        manifold: bool,
        oriented: bool,
    },

    #[error("domain mismatch: {context} ({left} vs {right})")]
    DomainMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("icosphere level {0} exceeds the supported maximum of 8")]
    LevelTooLarge(u32),

    #[error("nearest-neighbor query over an empty source set")]
    EmptySource,

    #[error("correspondence distance {distance} rad at target {target} exceeds the transport limit")]
    AntipodalCorrespondence { target: usize, distance: f64 },

    #[error("synthetic radius function is not positive (min {min_radius} at theta={theta}, phi={phi})")]
    NonPositiveRadius {
        min_radius: f64,
        theta: f64,
        phi: f64,
    },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse_line(
        path: impl Into<PathBuf>,
        line: u64,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            offset: line,
            unit: "line",
            message: message.into(),
        }
    }

    pub(crate) fn parse_byte(
        path: impl Into<PathBuf>,
        offset: u64,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            offset,
            unit: "byte",
            message: message.into(),
        }
    }
}
