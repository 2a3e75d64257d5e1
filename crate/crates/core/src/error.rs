use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("vector has nonzero extended slot")]
    ExtendedSlot,

    #[error("point is not a member of the set")]
    Membership,

    #[error("point is not a hull vertex")]
    NotVertex,

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid ansatz: {0}")]
    Ansatz(String),

    #[error("vector not in the hyperplane v_(r+1) = -1")]
    NotInP,

    #[error("superpotential condition not satisfied")]
    Unsatisfied,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("integrator failure: {0}")]
    Integrator(String),
}

pub type Result<T> = std::result::Result<T, Error>;
