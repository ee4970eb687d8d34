use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QcapError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },

    #[error("empty subsystem set")]
    EmptySubsystemSet,

    #[error("overlapping target subsystems {0:?}")]
    OverlappingTargets(Vec<usize>),

    #[error("cut must be a proper nonempty subset of the subsystems")]
    TrivialCut,

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("eigenvalue {0:e} is below the clamp window")]
    NegativeEigenvalue(f64),

    #[error("Kraus family is not trace preserving (deviation {0:e})")]
    Incomplete(f64),

    #[error("empty Kraus family")]
    EmptyKraus,

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("probabilities sum to {0}, expected 1")]
    ProbabilitySum(f64),

    #[error("register X is not classical (off-diagonal weight {0:e})")]
    NotClassical(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, QcapError>;
