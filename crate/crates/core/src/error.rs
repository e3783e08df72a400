use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("disorder parameter t = {0} must lie strictly inside (0, 1)")]
    InvalidDisorder(f64),

    #[error("band window rows {k_min}..={k_max} too small: need k_max - k_min >= 6")]
    WindowTooSmall { k_min: i64, k_max: i64 },

    #[error("eigen recursion needs an even number (>= 8) of phases, got {0}")]
    PhaseCount(usize),

    #[error("zero vector has no projective direction")]
    ZeroVector,

    #[error("matrix is singular (|det| = {0:e})")]
    SingularMatrix(f64),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("unsupported measure kind for this operation: {0}")]
    UnsupportedMeasure(&'static str),

    #[error("cannot parse angle literal {0:?}")]
    AngleParse(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("stream mode mismatch: expected {expected}, got {found}")]
    StreamMode { expected: &'static str, found: &'static str },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("parabolic transfer matrix (trace {0}) has no diagonalizing conjugation")]
    Parabolic(f64),

    #[error("witness not certified: {0}")]
    NotCertified(String),

    #[error("invariant measure estimate did not converge: {0}")]
    NotConverged(String),
}

pub type Result<T> = std::result::Result<T, Error>;
