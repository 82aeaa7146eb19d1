use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {0} lies outside [0, 1]")]
    Domain(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trajectory has {have} points but {need} are required")]
    InsufficientTrajectory { need: usize, have: usize },

    #[error("index {index} with window {window} overflows a trajectory of length {len}")]
    WindowOverflow {
        index: usize,
        window: usize,
        len: usize,
    },

    #[error("depth {depth} exceeds the cap {cap}")]
    DepthOverflow { depth: usize, cap: usize },

    #[error("pair scan of {pairs} pairs exceeds the limit {limit} (set RQA_MAX_PAIRS to raise it)")]
    ResourceGuard { pairs: u128, limit: u128 },

    #[error("construction check failed: {0}")]
    Construction(String),

    #[error("cannot parse rational {0:?}")]
    ParseRational(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
