use thiserror::Error;

/// Errors raised while building bases, fitting expansions, or running experiments.
#[derive(Debug, Error)]
pub enum SddError {
    /// A point was evaluated outside the support it belongs to.
    #[error("value {value} lies outside the support [{lower}, {upper}]")]
    Domain { value: f64, lower: f64, upper: f64 },

    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The spline moment matrix lost positive-definiteness during factorization.
    #[error(
        "spline moment matrix is numerically singular: pivot {index} = {pivot:e} is below the \
         threshold {threshold:e}; coarsen the mesh or lower the degree"
    )]
    Conditioning {
        index: usize,
        pivot: f64,
        threshold: f64,
    },

    /// The requested operation is not offered for this configuration.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl SddError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        SddError::Argument(msg.into())
    }
}

pub type Result<T, E = SddError> = std::result::Result<T, E>;
