use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no sampleable surface")]
    NoSampleableSurface,

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),

    #[error("cloud has no normals; run normal estimation first")]
    MissingNormals,

    #[error("no shapes found under {0}")]
    NoShapes(PathBuf),

    #[error("duplicate shape id `{0}`")]
    DuplicateShape(String),

    #[error("required category `{0}` is not available in the shape library")]
    MissingCategory(String),

    #[error("layout defect: required placements {first} and {second} have overlapping bounds")]
    LayoutCollision { first: usize, second: usize },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("segmenter timed out after {0:?} waiting for a response")]
    Timeout(Duration),

    #[error("response schema violation at `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("unknown query `{0}`")]
    UnknownQuery(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed {format} file {path}: {message}")]
    Format {
        format: &'static str,
        path: PathBuf,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Whether the error stems from user-provided input (config, files, layouts)
    /// rather than from a failure inside the pipeline.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::LengthMismatch(..))
    }
}
