use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sparsity {s} for a vector of length {n}")]
    InvalidSparsity { s: usize, n: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfBounds { index: usize, len: usize },

    #[error("support indices must be strictly increasing")]
    UnsortedSupport,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    /// The restricted cross-Gram matrix is singular or too ill-conditioned
    /// to solve against. `condition` is the estimate that tripped the floor.
    #[error("rank-deficient system (condition estimate {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("invalid sampling density: {0}")]
    InvalidDensity(String),

    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),

    #[error("invalid dictionary request: {0}")]
    InvalidDictionary(String),

    #[error(
        "enumeration needs {required} subsets but the budget is {budget}; \
         use the sampled lower-bound mode instead"
    )]
    EnumerationBudget { required: u128, budget: u64 },

    #[error("degenerate matrix pair: {0}")]
    DegeneratePair(String),

    #[error("constants undefined: {0}")]
    ConstantsUndefined(String),

    #[error("bound undefined: {0}")]
    BoundUndefined(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line {line}: {message}")]
    ConfigLine { line: usize, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by user-supplied configuration rather than a
    /// failure during computation.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::ConfigLine { .. }
                | Error::InvalidSparsity { .. }
                | Error::InvalidDensity(_)
                | Error::InvalidDictionary(_)
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
