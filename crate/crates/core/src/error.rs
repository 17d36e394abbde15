use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema: {0}")]
    Schema(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("missing class value in row {row}")]
    MissingClass { row: usize },
    #[error("non-numeric token `{token}` in numeric column `{column}` (row {row})")]
    NonNumeric {
        column: String,
        row: usize,
        token: String,
    },
    #[error("no usable predictor columns")]
    NoPredictors,
    #[error("class `{0}` has no training rows")]
    EmptyClass(String),
    #[error("need at least two classes, found {0}")]
    TooFewClasses(usize),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("empty node membership")]
    EmptyMembership,
    #[error("invalid priors: {0}")]
    Priors(String),
    #[error("invalid cost matrix: {0}")]
    Costs(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("model format: {0}")]
    Model(String),
    #[error("bootstrap sample kept missing a class after {0} attempts")]
    Bootstrap(usize),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the input data rather than by usage or internals.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
