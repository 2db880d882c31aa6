use thiserror::Error;

/// Failures raised by the numerical routines.
///
/// Numeric payloads are stored as `f64` so that the error type does not depend on the scalar.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge on [{a}, {b}]: achieved relative error {achieved:e}")]
    Quadrature { a: f64, b: f64, achieved: f64 },

    #[error("step size underflow at t = {t}")]
    Stiffness { t: f64 },

    #[error("step budget of {steps} exhausted at t = {t}")]
    StepBudget { t: f64, steps: usize },

    #[error("zone constant too small: det N1 = {det} at lambda = {lambda}, t = {t}")]
    ZoneConstant { lambda: f64, t: f64, det: f64 },

    #[error("series did not converge after {terms} terms (last increment {increment:e})")]
    SeriesDivergence { terms: usize, increment: f64 },

    #[error("inconsistent result: {0}")]
    Inconsistency(String),

    #[error("horizon cap {cap} reached before convergence (last difference {difference:e})")]
    Horizon { cap: f64, difference: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("declared regime contradicted at t = {witness_t}: {message}")]
    Validation { witness_t: f64, message: String },

    #[error("singular matrix (det = {det:e})")]
    Singular { det: f64 },

    #[error("mode {index}: {source}")]
    Mode {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_mode(self, index: usize) -> Self {
        Error::Mode { index, source: Box::new(self) }
    }

    /// Innermost error, skipping mode annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Mode { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
