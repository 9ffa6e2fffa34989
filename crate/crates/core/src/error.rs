use thiserror::Error;

#[derive(Debug, Error)]
pub enum BiaError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The requested (K, r) cannot be built without `pad_b`.
    #[error("infeasible construction for K={k}, r={r}: {bound}")]
    Infeasible { k: usize, r: usize, bound: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("receiver {receiver}: projected desired matrix has condition number {condition:e}")]
    IllConditioned { receiver: usize, condition: f64 },

    #[error("scheme has not passed verification: {0}")]
    Unverified(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = BiaError> = std::result::Result<T, E>;
