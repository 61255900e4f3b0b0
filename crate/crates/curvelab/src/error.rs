//! Error types shared across the crate.

use thiserror::Error;

/// Position-annotated syntax error for the curve text format.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, Error)]
pub enum CurveError {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),

    /// A series with an exponent below 1 (the germ is tangent to the y-axis,
    /// which the coordinate conventions exclude).
    #[error("tangent to y-axis: {0}")]
    TangentToYAxis(String),

    #[error("non-reduced curve: {0}")]
    NonReduced(String),

    #[error("ultrametric violation: {0} bad triple(s)")]
    Ultrametric(usize),

    #[error("carrousel structure violation: {0}")]
    CarrouselStructure(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    /// A consistency check that should hold for every valid input failed;
    /// indicates a bug rather than bad input.
    #[error("internal invariant failure: {0}")]
    Internal(String),
}

impl CurveError {
    /// Process exit code class: 2 for input problems, 3 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CurveError::Parse(_)
            | CurveError::TangentToYAxis(_)
            | CurveError::NonReduced(_)
            | CurveError::Invalid(_) => 2,
            CurveError::Ultrametric(_)
            | CurveError::CarrouselStructure(_)
            | CurveError::Internal(_) => 3,
        }
    }
}
