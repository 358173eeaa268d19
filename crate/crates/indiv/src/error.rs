use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("modulus {0} does not fit the coefficient type (max 251)")]
    ModulusTooLarge(u32),
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("operands belong to different rings")]
    RingMismatch,
    #[error("characteristic mismatch: {0} vs {1}")]
    CharMismatch(u32, u32),
    #[error("index set mismatch: {0}")]
    IndexMismatch(String),
    #[error("index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("duplicate label: {0}")]
    DuplicateLabel(String),
    #[error("repeated variable in quotient forms: {0}")]
    RepeatedVariable(String),
    #[error("operation not supported here: {0}")]
    Unsupported(String),
    #[error("ring is not p-boolean (witness: {0})")]
    NotPBoolean(String),
    #[error("ring is not finite-dimensional")]
    InfiniteDimensional,
    #[error("cokernel is not free: {0}")]
    NonFreeCokernel(String),
    #[error("sequence must have at least one entry")]
    EmptySpec,
    #[error("map is not a ring homomorphism: {0}")]
    NotAHomomorphism(String),
    #[error("construction invariant violated: {0}")]
    ConstructionFailure(String),
    #[error("bad witness file: {0}")]
    WitnessFormat(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
