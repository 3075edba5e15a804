use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent schema, shape, or training configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A precondition of the caller was violated (for example an infeasible
    /// starting point handed to the projection walk).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("training aborted at step {step}: {detail}")]
    Training { step: usize, detail: String },

    #[error("unseen category {value:?} for feature {feature:?}")]
    UnseenCategory { feature: String, value: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("failed to fit calibrator: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
