use thiserror::Error;

/// Errors surfaced by generators, channel math, scheduling and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("blocked count {requested} exceeds flow count {available}")]
    TooManyBlocked { requested: usize, available: usize },

    #[error("offset angle {0} degrees outside [0, 180]")]
    AngleOutOfRange(f64),

    #[error("zero-distance link between nodes {a} and {b}")]
    ZeroDistance { a: u32, b: u32 },

    #[error("zero-rate hop via relay {relay} for flow {flow}")]
    ZeroRate { flow: usize, relay: u32 },

    #[error("vertex {0} not present in contention graph")]
    MissingVertex(usize),

    #[error("concurrent set violates the pairwise interference bound: {0}")]
    BoundPrecondition(String),

    #[error("instance search space {estimate} exceeds node budget {budget}")]
    OverBudget { estimate: u128, budget: u128 },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
