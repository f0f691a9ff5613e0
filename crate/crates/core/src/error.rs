use thiserror::Error;

/// Errors raised by the network model, the algorithms and the checkers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable index {0} out of range")]
    VariableOutOfRange(usize),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("domain `{domain}` lists value `{value}` twice")]
    DuplicateValue { domain: String, value: String },

    #[error("unknown value `{value}` for `{context}`")]
    UnknownValue { context: String, value: String },

    #[error("constraint scope must name two distinct variables (got {0} twice)")]
    SelfLoop(usize),

    #[error("ordering does not cover the variables: {0}")]
    OrderingMismatch(String),

    #[error("malformed path: {0}")]
    MalformedPath(String),

    #[error("search space of {estimate} exceeds the oracle bound {bound}")]
    SearchSpaceTooLarge { estimate: f64, bound: f64 },

    #[error("arity {0} exceeds the supported maximum of 4")]
    ArityOverflow(usize),

    #[error("closure exceeded the cap of {0} relations")]
    ClosureCapExceeded(usize),

    #[error("invalid majority operation: {0}")]
    InvalidMajority(String),

    #[error("invalid tree domain: {0}")]
    InvalidTree(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("generator gave up after {0} attempts")]
    GaveUp(usize),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
