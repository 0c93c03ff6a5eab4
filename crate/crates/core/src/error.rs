use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A structured document failed validation; `field` names the offending field.
    #[error("{}: invalid `{field}`: {message}", path.display())]
    Schema {
        path: PathBuf,
        field: String,
        message: String,
    },

    #[error("`{field}` references missing file {}", path.display())]
    DanglingReference { field: String, path: PathBuf },

    #[error("{}: missing required column `{column}`", path.display())]
    MissingColumn { path: PathBuf, column: String },

    #[error("{}:{line}: {message}", path.display())]
    Row {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{}:{line}: frame {frame} does not increase over previous frame {previous}", path.display())]
    NonMonotoneFrames {
        path: PathBuf,
        line: u64,
        frame: u64,
        previous: u64,
    },

    #[error("saliency map format: {0}")]
    MapFormat(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("zero-duration segment [{start}, {end}]")]
    ZeroDuration { start: usize, end: usize },

    #[error("frame range mismatch: {0}")]
    RangeMismatch(String),

    #[error("all frames are excluded")]
    AllExcluded,

    #[error("need at least {need} correspondences, got {got}")]
    TooFewCorrespondences { got: usize, need: usize },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("point maps to infinity (|w| = {w:e})")]
    PointAtInfinity { w: f64 },

    #[error("no model reached {need} inliers")]
    NoConsensus { need: usize },

    #[error("pair {0} has no reference fixation")]
    MissingReference(String),

    #[error("zero-mass map: {0}")]
    ZeroMass(String),

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("fixation ({x}, {y}) lies outside the {width}x{height} frame")]
    OffFrame {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    /// A metric is undefined for the inputs (e.g. constant map for CC).
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("input not sorted: {0}")]
    Unsorted(String),

    #[error("{}:{line}:{column}: malformed XML: {message}", path.display())]
    Xml {
        path: PathBuf,
        line: u32,
        column: u32,
        message: String,
    },

    #[error("way {way} references missing node {node}")]
    MissingNode { way: i64, node: i64 },

    #[error("missing files: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    MissingFiles(Vec<PathBuf>),

    #[error("{}: {message}", path.display())]
    Image { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(
        path: impl Into<PathBuf>,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Schema {
            path: path.into(),
            field: field.into(),
            message: message.into(),
        }
    }
}
