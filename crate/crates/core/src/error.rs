use thiserror::Error;

/// Errors raised by the estimators, tests and numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("matrix is not positive definite (min eigenvalue {min_eig:e}, max {max_eig:e})")]
    NotPositiveDefinite { min_eig: f64, max_eig: f64 },

    #[error("matrix is ill-conditioned (condition number {cond:e})")]
    IllConditioned { cond: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("insufficient sample: n = {n} but at least {required} observations are needed")]
    InsufficientSample { n: usize, required: usize },

    #[error("observation {index} coincides with the center")]
    DegenerateObservation { index: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("moment of order {order} diverges for {family}")]
    DivergentMoment { family: String, order: f64 },

    #[error("unsupported radial family: {0}")]
    UnsupportedFamily(String),

    #[error(
        "density {actual} lies outside the admissible class for reference {reference}: {reason}"
    )]
    OutsideClass {
        reference: String,
        actual: String,
        reason: String,
    },

    #[error("the Gaussian reference density gives a degenerate projection")]
    DegenerateReference,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Numerical errors are the ones a Monte Carlo cell may tolerate in small numbers.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::Config(_) | Error::Parse { .. } | Error::Io(_) | Error::UnsupportedFamily(_)
        )
    }

    /// Process exit code: 1 usage or configuration, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Contract(_)
            | Error::UnsupportedFamily(_)
            | Error::DegenerateReference
            | Error::OutsideClass { .. }
            | Error::DivergentMoment { .. } => 1,
            Error::Parse { .. }
            | Error::Io(_)
            | Error::InsufficientSample { .. }
            | Error::DegenerateObservation { .. }
            | Error::Degenerate(_) => 2,
            Error::NotPositiveDefinite { .. }
            | Error::IllConditioned { .. }
            | Error::NumericalFailure(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
