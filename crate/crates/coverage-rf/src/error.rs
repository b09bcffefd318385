use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("need more than {k} points for the {k}-nearest-neighbour heuristic, got {n}")]
    TooFewPoints { n: usize, k: usize },

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("all feature scores vanish (Z^T y = 0); selection is uninformative")]
    DegenerateScores,

    #[error("selection size M={m} out of range for pool size {pool}")]
    SelectionOutOfRange { m: usize, pool: usize },

    #[error("unknown method name: {0}")]
    UnknownMethod(String),

    #[error("malformed record: {0}")]
    Parse(String),

    #[error("trial {trial} (scenario seed {seed}) failed: {source}")]
    Trial {
        trial: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
