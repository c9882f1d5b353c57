use thiserror::Error;

/// Errors raised by the library. Each variant maps onto one of the CLI exit
/// classes through [`Error::exit_code`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("zero exponent literal at byte {0}")]
    ZeroExponent(usize),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("{what} exceeds bound {limit}")]
    BoundExceeded { what: String, limit: usize },

    #[error("rewriting fuel exhausted after {0} steps")]
    FuelExhausted(u64),

    #[error("missing weight for singleton {{{0}}}")]
    MissingSingleton(String),

    #[error("weight table is not monotone: {0}")]
    Monotonicity(String),

    #[error("invalid preset: {0}")]
    InvalidPreset(String),

    #[error("order condition violated: {0}")]
    OrderViolation(String),

    #[error("subgroup generated by {{{0}}} is not nilpotent, so the group is not locally nilpotent")]
    NotNilpotent(String),

    #[error("subgroup generated by {{{0}}} is not solvable")]
    NotSolvable(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("arity mismatch: law uses {expected} variables, {got} values supplied")]
    Arity { expected: usize, got: usize },

    #[error("invalid law chain: {0}")]
    InvalidChain(String),

    #[error("invalid branch set: {0}")]
    InvalidBranches(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Exit code for the command-line front end: 2 for malformed input,
    /// 3 for exhausted resource bounds, 1 for anything that indicates a
    /// failed verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BoundExceeded { .. } | Error::FuelExhausted(_) => 3,
            Error::Internal(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
