use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("physical data radius {radius} does not cover the lightcone slice [0, {t}]")]
    DomainTooSmall { radius: f64, t: f64 },
    #[error("gauge solution singular: T' - T + T e^-tau = {0} <= 0")]
    GaugeSingular(f64),
    #[error("eigensolver failure: {0}")]
    NumericalFailure(String),
    #[error("spectral failure: {0}")]
    SpectralFailure(String),
    #[error("integration failure at tau = {last_good_tau}: {reason}")]
    IntegrationFailure { last_good_tau: f64, reason: String },
    #[error("growth rate undefined: {0}")]
    UndefinedRate(String),
    #[error("spectral parameter Re(lambda) = {0} outside the strip [0, 1/3]")]
    OutOfStrip(f64),
    #[error("degenerate spectral parameter: {0}")]
    DegenerateParameter(String),
    #[error("adaptive step size collapsed at rho = {rho} (h = {step})")]
    StiffFailure { rho: f64, step: f64 },
    #[error("scaled Wronskian not constant: relative spread {0:e}")]
    InconsistentWronskian(f64),
    #[error("Green function singular: |w0| = {0:e}")]
    EigenvalueSingularity(f64),
    #[error("hypergeometric evaluation outside reachable domain: {0}")]
    EvaluationDomain(String),
    #[error("Gamma pole at {0}")]
    GammaPole(String),
    #[error("resolvent failed at omega = {failed:?}")]
    PartialResult { failed: Vec<f64> },
    #[error("shooting bracket invalid: {0}")]
    ShootingBracket(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit code: 2 for invalid input or configuration, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::DomainTooSmall { .. }
            | Error::OutOfStrip(_)
            | Error::DegenerateParameter(_)
            | Error::EvaluationDomain(_)
            | Error::GammaPole(_)
            | Error::Io(_)
            | Error::Config(_) => 2,
            _ => 3,
        }
    }
}
