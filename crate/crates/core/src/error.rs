use thiserror::Error;

/// Errors produced by the extraction, reduction and clustering pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("hOCR: {0}")]
    Hocr(String),

    #[error("invalid crop fraction {0} (expected 0 <= f < 0.5)")]
    CropFraction(f64),

    #[error("crop leaves an empty image ({width}x{height})")]
    EmptyCrop { width: usize, height: usize },

    #[error("bbox {0:?} does not intersect the page")]
    EmptyIntersection([i64; 4]),

    #[error("empty image")]
    EmptyImage,

    #[error("distance transform needs at least one background pixel")]
    NoBackground,

    #[error("bbox rejected: feature `{feature}` kept {count} values after filtering (need >= 5)")]
    TooFewValues { feature: &'static str, count: usize },

    #[error("no rows were produced")]
    NoRows,

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("requested {requested} components but at most {max} are available")]
    TooManyComponents { requested: usize, max: usize },

    #[error("kernel matrix has only {positive} positive eigenvalues, {requested} requested")]
    KernelRankDeficient { positive: usize, requested: usize },

    #[error("centred data has rank {rank}, {requested} components requested")]
    RankDeficient { rank: usize, requested: usize },

    #[error("invalid clustering parameters: {0}")]
    ClusterParams(String),

    #[error("insufficient rows: need {needed}, have {available} ({context})")]
    InsufficientRows {
        needed: usize,
        available: usize,
        context: String,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("config: {0}")]
    Config(String),

    #[error("dataset: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
