use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("evaluation at pole {pole} of a rational Herglotz-Nevanlinna function")]
    PoleEvaluation { pole: f64 },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("x = {x} lies outside the open interval (0, pi)")]
    OutOfDomain { x: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("no sign change of the characteristic function for eigenvalue index {n} on [{lo}, {hi}]")]
    BracketFailure { n: usize, lo: f64, hi: f64 },

    #[error("expected {expected} eigenvalues in [{lo}, {hi}] but found {found}")]
    MissedRoot {
        expected: usize,
        found: usize,
        lo: f64,
        hi: f64,
    },

    #[error("lambda = {lambda} is not an eigenvalue (beta estimates {first} and {second} disagree)")]
    NotAnEigenvalue {
        lambda: f64,
        first: f64,
        second: f64,
    },

    #[error("norming constant {gamma} for index {n} is not positive")]
    NonPositiveGamma { n: usize, gamma: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("grazing zero of the eigenfunction near x = {x}")]
    AmbiguousZero { x: f64 },

    #[error("insufficient data: need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

impl Error {
    /// True for failures caused by the caller's input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DomainViolation(_)
                | Error::OutOfDomain { .. }
                | Error::InvalidInput(_)
                | Error::PoleEvaluation { .. }
                | Error::Unsupported(_)
                | Error::InsufficientData { .. }
        )
    }
}
