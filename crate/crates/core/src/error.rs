use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("point is in contact with the membrane wall: {0}")]
    WallContact(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:e}, error {error:e})")]
    Convergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("bracket error: predicate has the same value ({value}) at both ends of [{lo:e}, {hi:e}]")]
    Bracket { lo: f64, hi: f64, value: bool },

    #[error("integrator step size underflow at t = {t:e}")]
    StepSizeUnderflow { t: f64, state: Vec<f64> },

    #[error("integrator exceeded {0} steps")]
    TooManySteps(usize),

    #[error("classification is not monotone across the impact-radius scan")]
    NonMonotone { scan: Vec<(f64, bool)> },

    #[error("phase is undefined for a trajectory that did not transmit")]
    UndefinedPhase,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("rank-deficient design matrix in least-squares fit")]
    RankDeficient,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
