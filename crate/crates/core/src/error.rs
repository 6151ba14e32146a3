use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("atom budget exceeded: {needed} atoms requested, budget is {budget} (set PMLLAB_ATOM_BUDGET to raise it)")]
    Capacity { needed: f64, budget: u64 },

    #[error("absolute continuity violated: {0}")]
    AbsoluteContinuity(String),

    #[error("undefined information density: {0}")]
    UndefinedDensity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible distortion target: {0}")]
    Infeasible(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDistribution(_) => "invalid-distribution",
            Error::Capacity { .. } => "capacity",
            Error::AbsoluteContinuity(_) => "absolute-continuity",
            Error::UndefinedDensity(_) => "undefined-density",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::Infeasible(_) => "infeasible",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
