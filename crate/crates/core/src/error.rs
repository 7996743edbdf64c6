use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("region {x0},{y0} {width}x{height} exceeds image bounds {image_width}x{image_height}")]
    Bounds {
        x0: usize,
        y0: usize,
        width: usize,
        height: usize,
        image_width: usize,
        image_height: usize,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("image of {width}x{height} is smaller than the 2x2 minimum")]
    Size { width: usize, height: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate hull input: {0}")]
    DegenerateHull(String),

    #[error("seed error: {0}")]
    Seed(String),

    #[error("evaluation set is empty: at least one annotated slice is required")]
    EmptyEvaluation,

    #[error("no slice carries a mask; nothing to reconstruct")]
    NoMasks,

    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error("annotation error: {0}")]
    Annotation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
