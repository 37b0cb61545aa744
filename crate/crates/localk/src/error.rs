use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("modulus must be monic of degree at least one, got {0}")]
    NonMonicModulus(String),

    #[error("element is not invertible")]
    NotInvertible,

    #[error("operands live in different algebras ({left} vs {right})")]
    AlgebraMismatch { left: String, right: String },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("invalid payload for {algebra}: {reason}")]
    InvalidElement { algebra: String, reason: String },

    #[error("invalid metric space: {0}")]
    InvalidSpace(String),

    #[error("invalid homomorphism: {0}")]
    InvalidHom(String),

    #[error("homomorphism {0} has no section")]
    NoSection(String),

    #[error("invalid indices: {0}")]
    InvalidIndices(String),

    #[error("matrix is not idempotent: entry ({row}, {col}) of p*p - p is {residual}")]
    NotIdempotent { row: usize, col: usize, residual: String },

    #[error("claimed inverse fails: entry ({row}, {col}) of {product} is {value}")]
    NotInverse { row: usize, col: usize, product: String, value: String },

    #[error("not O-shaped: {0}")]
    NotOShaped(String),

    #[error("not a double matrix: entry ({row}, {col}) maps to {left} on the first leg and {right} on the second")]
    NotDouble { row: usize, col: usize, left: String, right: String },

    #[error("claimed level {claimed} does not match computed level {computed}")]
    LevelMismatch { claimed: u32, computed: u32 },

    #[error("coefficient {0} is not dyadic")]
    NotDyadic(String),

    #[error("precondition failed at {stage}: {detail}")]
    Precondition { stage: String, detail: String },
}

impl Error {
    pub fn precondition(stage: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Precondition { stage: stage.into(), detail: detail.into() }
    }
}
