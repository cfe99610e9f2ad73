use thiserror::Error;

pub type Result<T> = std::result::Result<T, MhdError>;

#[derive(Debug, Error)]
pub enum MhdError {
    /// A state with non-positive density or pressure turned up where an
    /// admissible one is required.
    #[error("non-physical state at {location}: {reason}")]
    NonPhysical { location: String, reason: String },

    /// A time step exceeded the positivity-preserving CFL bound; the step
    /// must be rejected and retried with `dt <= max_dt`.
    #[error("step rejected: dt = {dt:.6e} exceeds the admissible {max_dt:.6e}")]
    StepRejected { dt: f64, max_dt: f64 },

    /// The constrained-transport fixed-point iteration ran out of sweeps.
    /// Carries the error history so callers can diagnose or halve `dt`.
    #[error("fixed-point iteration failed to converge after {iterations} sweeps (last error {final_error:.3e})")]
    NoConvergence {
        iterations: usize,
        final_error: f64,
        history: Vec<f64>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    /// A guarantee of the scheme was violated. Unreachable when the CFL
    /// checks pass; treated as a bug, never silently repaired.
    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl MhdError {
    /// Errors that a driver may handle by halving the time step.
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            MhdError::StepRejected { .. } | MhdError::NoConvergence { .. }
        )
    }
}
