use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("branch {k} has probability {p:e}")]
    ZeroProbabilityBranch { k: usize, p: f64 },
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("problem too large for exact mode: {0}")]
    TooLarge(String),
    #[error("no energy eigenstate has weight above the threshold")]
    EmptySupport,
    #[error("couplings are not symmetric under r -> -r")]
    AsymmetricCouplings,
    #[error("negative squared frequency {0:e}")]
    Tachyonic(f64),
    #[error("unknown strategy '{0}'")]
    UnknownStrategy(String),
}

pub type Result<T> = std::result::Result<T, Error>;
