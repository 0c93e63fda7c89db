use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("{0} has zero variance")]
    ZeroVariance(String),
    #[error("design matrix is rank deficient: column {column} is collinear with earlier columns")]
    RankDeficient { column: String },
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("{0}")]
    Invalid(String),
}
