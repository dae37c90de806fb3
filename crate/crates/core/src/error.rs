use thiserror::Error;

/// Errors produced by the solvers, the analysis routines and the scenario layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate feedback a = -1: only the trivial solution exists")]
    DegenerateFeedback,

    #[error("characteristic coordinate {y} lies below the evaluation cone (must be >= {min})")]
    OutOfCone { y: f64, min: f64 },

    #[error("point (x = {x}, t = {t}) lies outside the domain 0 <= x <= 1 + k t, t >= 0")]
    OutOfDomain { x: f64, t: f64 },

    #[error("initial displacement violates the trace condition u0(0) = 0 (u0(0) = {0})")]
    TraceViolation(f64),

    #[error("compatibility condition for mu1 = -1 fails: residual {residual:e} at t = {t}")]
    Compatibility { t: f64, residual: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("quadrature on [{a}, {b}] did not converge: error estimate {estimate:e} after {intervals} subintervals")]
    Quadrature { a: f64, b: f64, estimate: f64, intervals: usize },

    #[error("recursion depth exceeded the bound {0}")]
    RecursionDepth(usize),

    #[error("finite-difference solution diverged at t = {t} (field norm {norm:e})")]
    Divergence { t: f64, norm: f64 },

    #[error("grid configuration: {0}")]
    Config(String),

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::DegenerateFeedback
            | Error::OutOfCone { .. }
            | Error::OutOfDomain { .. }
            | Error::TraceViolation(_)
            | Error::Compatibility { .. }
            | Error::Unsupported(_)
            | Error::Config(_)
            | Error::Scenario(_)
            | Error::Io(_) => 2,
            Error::Quadrature { .. } | Error::RecursionDepth(_) | Error::Divergence { .. } => 3,
            Error::Verification(_) => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
