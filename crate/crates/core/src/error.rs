use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },

    #[error("domain error at t = {t}: {message}")]
    Domain { t: f64, message: String },

    #[error("quadrature on [{a}, {b}] did not reach tolerance (estimated error {error:e})")]
    QuadratureFailure { a: f64, b: f64, error: f64 },

    #[error("unknown nonlinearity `{0}`")]
    UnknownName(String),

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("precondition violated: {message}")]
    PreconditionViolated { message: String, witness: Option<f64> },

    #[error("negative discriminant xi' + xi^2 = {value:e} at t = {t}")]
    NegativeDiscriminant { t: f64, value: f64 },

    #[error("newton iteration did not converge at lambda = {lambda}: {reason}")]
    NoConvergence { lambda: f64, reason: String },

    #[error("iteration cap of {0} reached")]
    IterationCap(usize),

    #[error("floating-point overflow at t = {t}")]
    Overflow { t: f64 },

    #[error("second derivative unavailable: {0}")]
    SecondDerivativeUnavailable(String),

    #[error("continuation failed: {0}")]
    Failure(String),
}

impl Error {
    pub(crate) fn precondition(message: impl Into<String>) -> Self {
        Error::PreconditionViolated {
            message: message.into(),
            witness: None,
        }
    }

    pub(crate) fn precondition_at(message: impl Into<String>, t: f64) -> Self {
        Error::PreconditionViolated {
            message: message.into(),
            witness: Some(t),
        }
    }

    pub(crate) fn domain(t: f64, message: impl Into<String>) -> Self {
        Error::Domain {
            t,
            message: message.into(),
        }
    }

    /// The sample point attached to the error, when there is one.
    pub fn witness(&self) -> Option<f64> {
        match self {
            Error::PreconditionViolated { witness, .. } => *witness,
            Error::NegativeDiscriminant { t, .. } | Error::Domain { t, .. } => Some(*t),
            Error::Overflow { t } => Some(*t),
            _ => None,
        }
    }
}
