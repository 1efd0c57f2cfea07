use thiserror::Error;

/// Errors shared by every layer of the engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("malformed jet index in `{name}`: {msg}")]
    BadJetIndex { name: String, msg: String },

    #[error("division by the zero expression")]
    DivisionByZero,

    #[error("singular substitution: a denominator vanished identically")]
    SingularSubstitution,

    #[error("jet order limit {limit} exceeded")]
    JetOrderLimit { limit: usize },

    #[error("singular base map: det of the Jacobian is identically zero")]
    SingularMap,

    #[error("base dimension {n} exceeds the symbolic inversion limit of 4")]
    BaseTooLarge { n: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bundle declaration error: {0}")]
    BadBundle(String),

    #[error("invalid bundle map: {0}")]
    BadAutomorphism(String),

    #[error("operator outside the supported cases: {0}")]
    UnsupportedOperator(String),

    #[error("composition coefficient ({i},{j}) out of range (max {max})")]
    CompCoeffRange { i: u32, j: u32, max: u32 },

    #[error("transformation failed the canonicity check")]
    NonCanonical,
}

pub type Result<T> = std::result::Result<T, Error>;
