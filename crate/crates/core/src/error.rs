use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("label {label} out of range (family has {size} members)")]
    LabelOutOfRange { label: usize, size: usize },
    #[error("qubit cap exceeded: {needed} qubits requested, cap is {cap}")]
    CapacityExceeded { needed: usize, cap: usize },
    #[error("ancilla register `{0}` is not in the all-zeros state")]
    AncillaNotClean(String),
    #[error("schedule mismatch: {0}")]
    Schedule(String),
    #[error("entry modulus {0} exceeds 1")]
    Modulus(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
