use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received an out-of-range parameter.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An operation precondition does not hold for the given inputs.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An integral required by the operation does not converge for the
    /// given tail model (growth exponent too large for the kernel order).
    #[error("divergent integral: {0}")]
    Divergence(String),

    /// Regression or fitting was asked for with too few usable samples.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A time step larger than the CFL bound was requested.
    #[error("CFL violation: dt = {dt:.6e} exceeds bound {bound:.6e}")]
    CflViolation { dt: f64, bound: f64 },

    /// Experiment configuration could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn divergence(msg: impl Into<String>) -> Self {
        Error::Divergence(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
