use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    /// The requested evaluator cannot handle this input size; `fallback`
    /// names the one that can.
    #[error("{what} supports n <= {cap} (got n = {n}); use {fallback} instead")]
    Capability {
        what: &'static str,
        cap: usize,
        n: usize,
        fallback: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
