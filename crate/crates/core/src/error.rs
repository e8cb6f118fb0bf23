use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dirac kernel has no pointwise density")]
    NoPointwiseDensity,

    #[error("polar form invalid beyond first modulus zero (eps * omega = {0} >= pi)")]
    BeyondFirstModulusZero(f64),

    #[error("laplace transform evaluated at its pole z = {0}")]
    LaplacePole(f64),

    #[error("invalid kernel specification: unexpected token `{0}`")]
    KernelParse(String),

    #[error("invalid kernel parameter: {0}")]
    InvalidKernel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("analysis range exceeded: {0}")]
    AnalysisRangeExceeded(String),

    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),

    #[error("equilibrium is unstable without delay")]
    UnstableWithoutDelay,

    #[error("step exceeds delay (dt = {dt}, tau = {tau})")]
    StepExceedsDelay { dt: f64, tau: f64 },

    #[error("trajectory too short: {0}")]
    TrajectoryTooShort(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence(_) => 3,
            Error::BeyondFirstModulusZero(_)
            | Error::LaplacePole(_)
            | Error::AnalysisRangeExceeded(_)
            | Error::UnsupportedKernel(_)
            | Error::InvalidKernel(_)
            | Error::UnstableWithoutDelay
            | Error::NoPointwiseDensity
            | Error::Precondition(_) => 4,
            Error::KernelParse(_)
            | Error::InvalidArgument(_)
            | Error::StepExceedsDelay { .. }
            | Error::TrajectoryTooShort(_)
            | Error::Config(_) => 2,
            Error::Io(_) => 1,
        }
    }
}
