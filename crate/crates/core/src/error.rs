use thiserror::Error;

/// Errors produced by the library and the CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid payoff: {0}")]
    InvalidPayoff(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("strike grids do not match")]
    GridMismatch,

    #[error("strike {strike} is outside the curve span [{lo}, {hi}]")]
    OutOfSpan { strike: f64, lo: f64, hi: f64 },

    #[error("missing curve metadata: {0}")]
    MissingMetadata(&'static str),

    #[error("measure has no finite mean")]
    NoFiniteMean,

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {error:e}")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("derivative estimate at k={0} did not stabilize")]
    Derivative(f64),

    #[error("tail budget exceeded: curvature beyond the last strike contributes up to {bound:e} (budget {budget:e})")]
    TailBudget { bound: f64, budget: f64 },

    #[error("price {price} outside the no-arbitrage band [{lo}, {hi})")]
    ArbitrageBand { price: f64, lo: f64, hi: f64 },

    #[error("{0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 1 for I/O failures, 2 for everything
    /// that is a validation or schema problem.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.to_string())
        } else {
            Error::Parse(e.to_string())
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            Error::Io(e.to_string())
        } else {
            Error::Parse(e.to_string())
        }
    }
}
