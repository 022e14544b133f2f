use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid frequency convention: {0}")]
    InvalidConvention(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    /// The photonic density diverges at the band edge and its kernel diverges at zero lag.
    #[error("band-edge singularity: {0}")]
    EdgeSingularity(String),

    /// Energy inside the reservoir continuum would need a principal-value integral.
    #[error("energy {energy} lies inside the reservoir continuum")]
    InsideContinuum { energy: f64 },

    #[error("quadrature did not converge: estimated error {error:e} on value {value:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("root finding failed: {0}")]
    NonConvergence(String),

    #[error(
        "step {step} rejected: |y| = {magnitude} exceeds the contractivity bound (dt too large)"
    )]
    StepRejected { step: usize, magnitude: f64 },

    #[error("invalid solver settings: {0}")]
    InvalidSolver(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("trailing window not converged: |c| varies by {variation:.4} (limit {limit})")]
    WindowNotConverged { variation: f64, limit: f64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("no bound state anywhere in [{lo}, {hi}]")]
    NoMaximum { lo: f64, hi: f64 },
}

impl Error {
    /// True for failures of the numerics themselves, as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::NonConvergence(_)
                | Error::StepRejected { .. }
                | Error::WindowNotConverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
