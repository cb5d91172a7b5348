use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("training set is empty")]
    EmptyTrain,
    #[error("test set is empty")]
    EmptyTest,
    #[error("model family does not accept missing feature values")]
    UnsupportedMissing,
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("predictor has not been fitted")]
    Unfitted,
    #[error("target values must be strictly positive (row {row})")]
    NonpositiveTarget { row: usize },
    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("rejection sampling failed {0} times in a row")]
    RangeExhausted(usize),
    #[error("length mismatch: {actual} actual vs {predicted} predicted values")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("actual values must be strictly positive (index {index})")]
    NonpositiveActual { index: usize },
    #[error("MAPE must be nonnegative, got {0}")]
    NegativeMape(f64),
    #[error("total sum of squares is zero")]
    ZeroSst,
    #[error("degenerate degrees of freedom: n = {n}, k = {k}")]
    DegenerateDof { n: usize, k: usize },
    #[error("design matrix is rank deficient (condition number {condition:e})")]
    RankDeficient { condition: f64 },
    #[error("target {value} outside the domain of the {transform} transform")]
    TransformDomain { transform: &'static str, value: f64 },
    #[error("square-root-domain output {0} is negative")]
    NegativeSqrtDomain(f64),
    #[error("attribute values must be nonnegative, got {0}")]
    NegativeAttribute(f64),
    #[error("attribute weights sum to zero")]
    ZeroWeightSum,
    #[error("k = {k} exceeds the {available} stored cases")]
    KTooLarge { k: usize, available: usize },
    #[error("invalid rule base: {0}")]
    InvalidRuleBase(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// Stable upper-case error class used in CLI diagnostics and leaderboard markers.
    pub fn class(&self) -> &'static str {
        match self {
            Error::EmptyTrain => "EMPTY_TRAIN",
            Error::EmptyTest => "EMPTY_TEST",
            Error::UnsupportedMissing => "UNSUPPORTED_MISSING",
            Error::NonConvergence(_) => "NONCONVERGENCE",
            Error::Unfitted => "UNFITTED",
            Error::NonpositiveTarget { .. } => "NONPOSITIVE_TARGET",
            Error::Parse { .. } => "PARSE_ERROR",
            Error::SchemaMismatch(_) => "SCHEMA_MISMATCH",
            Error::InvalidSplit(_) => "INVALID_SPLIT",
            Error::RangeExhausted(_) => "RANGE_EXHAUSTED",
            Error::LengthMismatch { .. } => "LENGTH_MISMATCH",
            Error::NonpositiveActual { .. } => "NONPOSITIVE_ACTUAL",
            Error::NegativeMape(_) => "NEGATIVE_MAPE",
            Error::ZeroSst => "ZERO_SST",
            Error::DegenerateDof { .. } => "DEGENERATE_DOF",
            Error::RankDeficient { .. } => "RANK_DEFICIENT",
            Error::TransformDomain { .. } => "TRANSFORM_DOMAIN",
            Error::NegativeSqrtDomain(_) => "NEGATIVE_SQRT_DOMAIN",
            Error::NegativeAttribute(_) => "NEGATIVE_ATTRIBUTE",
            Error::ZeroWeightSum => "ZERO_WEIGHT_SUM",
            Error::KTooLarge { .. } => "K_TOO_LARGE",
            Error::InvalidRuleBase(_) => "INVALID_RULE_BASE",
            Error::InvalidConfig(_) => "INVALID_CONFIG",
            Error::Io(_) => "IO_ERROR",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
