use thiserror::Error;

/// Errors raised by the frame calculus.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("level {level} exceeds the grading's maximum level {max}")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("coordinate {index} lies beyond the truncation {truncation}")]
    CoordinateBeyondTruncation { index: usize, truncation: usize },

    #[error("coordinate indices are 1-based; got 0")]
    ZeroIndex,

    #[error("non-finite value at coordinate {index}")]
    NonFinite { index: usize },

    #[error("invalid weight grading: {0}")]
    InvalidGrading(String),

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("invalid index plan: {0}")]
    InvalidPlan(String),

    #[error("ℓ^p exponent must satisfy p >= 1 and be finite, got {0}")]
    InvalidExponent(f64),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("zero vector passed to a ratio computation (sample {0})")]
    ZeroVector(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation requires a diagonal or block frame")]
    WrongForm,

    #[error("lower X weight exceeds upper X weight at coordinate {index}")]
    DominanceViolated { index: usize },

    #[error("dense block of {size} columns exceeds the dense-mode limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("degenerate or unbounded operator: {0}")]
    Degenerate(String),

    #[error("vector lies outside the range of U: relative residual {residual:e}")]
    OutsideRange { residual: f64 },

    #[error("operator is not a left inverse of U: defect {defect:e} at coordinate {index}")]
    NotLeftInverse { index: usize, defect: f64 },

    #[error("plan has {len} levels but index {needed} is required")]
    PlanTooShort { needed: usize, len: usize },
}

pub type Result<T, E = FrameError> = std::result::Result<T, E>;
