use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `column` is 1-based and points into `input`.
    #[error("cannot parse `{input}` at column {column}: {message}")]
    Parse {
        input: String,
        column: usize,
        message: String,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("weight {index} is {value}; this mode requires strictly positive weights")]
    NonPositiveWeight { index: usize, value: f64 },

    /// A theorem hypothesis (premise or distributional condition) failed.
    #[error("precondition failed ({hypothesis}): {detail}")]
    Precondition { hypothesis: String, detail: String },

    #[error("weights {0} and {1} coincide; use quadrature for repeated weights")]
    RepeatedWeights(usize, usize),

    #[error("quadrature supports n = 1..=3 components, got {0}")]
    UnsupportedDimension(usize),

    #[error("t-grids differ")]
    GridMismatch,

    #[error("argument {name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },
}

impl Error {
    pub(crate) fn precondition(hypothesis: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Precondition {
            hypothesis: hypothesis.into(),
            detail: detail.into(),
        }
    }
}
