use thiserror::Error;

/// Errors raised by the reconstruction and approximation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("a multi-index needs at least one entry")]
    EmptyIndex,

    #[error("order {alpha} is not dominated by {delta}")]
    NotDominated { alpha: String, delta: String },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point {point:?} lies outside the domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("invalid piecewise polynomial: {0}")]
    InvalidPoly(String),

    #[error("trace bundle rejected: {0}")]
    InvalidBundle(String),

    #[error("not in S_2^delta: D^{alpha} jumps by {jump:.3e} across the axis-{axis} break at {at}")]
    NotSmooth {
        alpha: String,
        axis: usize,
        at: f64,
        jump: f64,
    },

    #[error("non-finite integrand value {value} at {point:?}")]
    NonFinite { point: Vec<f64>, value: f64 },

    #[error("invalid quadrature rule: {0}")]
    InvalidRule(String),

    #[error("derivative of order {0} is not available")]
    DerivativeUnavailable(String),

    #[error("invalid fit window: {0}")]
    InvalidWindow(String),

    #[error("unknown example '{0}'")]
    UnknownExample(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("degree {degree} is too high for conversion to monomial form (limit {limit})")]
    DegreeTooHigh { degree: usize, limit: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
