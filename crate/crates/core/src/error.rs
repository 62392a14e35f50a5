use thiserror::Error;

/// Errors produced by the explanation engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("load error at line {line}: {message}")]
    Load { line: u64, message: String },

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("entity has {got} values but {expected} features are declared")]
    Arity { expected: usize, got: usize },

    #[error("conditioning on zero-probability event: no row matches the entity on {{{features}}}")]
    ZeroProbability { features: String },

    #[error("value {value} of feature `{feature}` is not covered by its buckets")]
    Uncovered { feature: String, value: String },

    #[error("invalid bucket specification for `{feature}`: {message}")]
    BucketSpec { feature: String, message: String },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("oracle timed out after {0} ms")]
    OracleTimeout(u64),

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singular design matrix: {0}")]
    Singular(String),

    #[error("misaligned inputs: {0}")]
    Misaligned(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
