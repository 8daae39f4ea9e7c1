use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid rigid motion: {0}")]
    InvalidMotion(String),

    #[error("matrix is singular")]
    Singular,

    #[error("invalid piece: {0}")]
    InvalidPiece(String),

    #[error("piece index {index} out of range for {kind}")]
    IndexOutOfRange { kind: &'static str, index: usize },

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("point lies inside the target")]
    PointInsideTarget,

    #[error("target is unbounded")]
    UnboundedTarget,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("no free gap fits piece {index}")]
    Capacity { index: usize },

    #[error("packer infeasible at upper parameter (first failing piece {index})")]
    InfeasibleAtHi { index: usize },

    #[error("invalid packing sequence: {0}")]
    InvalidSequence(String),

    #[error(
        "divergence: largest cluster at radius {radius:e} has {largest} of {required} required entries"
    )]
    Divergence {
        radius: f64,
        largest: usize,
        required: usize,
    },

    #[error("empty input")]
    EmptyInput,

    #[error("parse error: {0}")]
    Parse(String),
}
