use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NonHermitian { defect: f64, tol: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not unitary: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotUnitary { defect: f64, tol: f64 },
    #[error("generator list is empty")]
    EmptyGeneratorList,
    #[error("time {t} outside table range [{min}, {max}]")]
    OutOfTableRange { t: f64, min: f64, max: f64 },
    #[error("step count must be at least 1")]
    InvalidStepCount,
    #[error("time {t} is off the propagator grid (t_final = {t_final})")]
    OffGrid { t: f64, t_final: f64 },
    #[error("pulse duration {dt} is negative")]
    NegativeDuration { dt: f64 },
    #[error("pulse parameter out of bounds: {reason}")]
    ParamOutOfBounds { reason: String },
    #[error("generator id {id} out of range (candidate set has {len} elements)")]
    BadGeneratorId { id: usize, len: usize },
    #[error("no remaining grid times: the factorization already ends at t_final")]
    NoRemainingGrid,
    #[error("slice count must be at least 1")]
    InvalidSliceCount,
    #[error("search grid is empty")]
    EmptyGrid,
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error("search space has {leaves} leaves, above the limit {limit}")]
    SearchSpaceTooLarge { leaves: u64, limit: u64 },
    #[error("generator '{label}' is not Hermitian: defect {defect:.3e}")]
    NonHermitianGenerator { label: String, defect: f64 },
    #[error("unknown pulse family '{name}'")]
    UnknownPulseFamily { name: String },
    #[error("problem document parse error: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("missing field '{field}'")]
    MissingField { field: String },
    #[error("i/o failure: {0}")]
    WriteFailure(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
