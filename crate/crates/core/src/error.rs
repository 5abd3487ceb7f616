use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is singular after diagonal loading (dim {dim}, trace {trace:e}, min pivot {min_pivot:e})")]
    Singular {
        dim: usize,
        trace: f64,
        min_pivot: f64,
    },

    #[error("relay {0} has not decoded its packet yet")]
    RelayNotDecoded(usize),

    #[error("phase {0} missing from received stack")]
    MissingPhase(usize),

    #[error("degenerate cross-correlation: allocation has zero norm")]
    DegenerateAllocation,

    #[error("empty sample set")]
    EmptySamples,

    #[error("group size {group} exceeds user count {users}")]
    GroupTooLarge { group: usize, users: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            context,
            expected,
            actual,
        }
    }
}
