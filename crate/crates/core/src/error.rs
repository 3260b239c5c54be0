use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {dim} exceeds the maximum of {max}")]
    DimensionOverflow { dim: usize, max: usize },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("operator entries do not form a square matrix ({0} entries)")]
    NotSquare(usize),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("invalid projector family: {0}")]
    NotProjectorFamily(String),
    #[error("uniform draw {0} outside [0, 1)")]
    InvalidUniform(f64),
    #[error("selected outcome {outcome} has negligible probability {probability:e}")]
    NegligibleOutcome { outcome: usize, probability: f64 },
    #[error("invalid Pauli string: {0}")]
    InvalidPauliString(String),
    #[error("direction is not a unit vector (norm {norm})")]
    NotUnitVector { norm: f64 },
    #[error("{slots} slots exceed the enumeration cap of {max}")]
    SlotCap { slots: usize, max: usize },
    #[error("{particles} particles exceed the sign-solver cap of {max}")]
    ParticleCap { particles: usize, max: usize },
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("no sign assigned to particle {0}")]
    MissingSign(String),
    #[error("system does not reduce to pair products: {0}")]
    NotPairProduct(String),
    #[error("grid resolution {resolution} below the minimum of {min}")]
    GridTooSmall { resolution: usize, min: usize },
    #[error("shot count must be at least 1")]
    NoShots,
    #[error("nothing to export")]
    EmptyExport,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
