use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("near-defective matrix: eigenvector condition estimate {condition:.3e} exceeds {limit:.0e}")]
    NearDefective { condition: f64, limit: f64 },
    #[error("quadrature setup failed: {0}")]
    QuadratureSetup(String),
    #[error("finite-difference step too small: {0}")]
    StepSize(String),
    #[error("integration blew up at step {step} (t = {time})")]
    IntegrationBlowup { step: usize, time: f64 },
    #[error("invalid stencil: {0}")]
    InvalidStencil(String),
    #[error("outside domain: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
