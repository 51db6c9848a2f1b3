use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument outside the supported domain: {0}")]
    Domain(String),
    #[error("singular point: {0}")]
    Singularity(String),
    #[error("overflow while evaluating {0}")]
    Overflow(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(
        "spectral parameter {nu} is within the guard radius of eigenvalue {nearest} \
         (relative distance {distance:.3e})"
    )]
    PoleProximity {
        nu: Complex64,
        nearest: Complex64,
        distance: f64,
    },
    #[error("resonance: {0}")]
    Resonance(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("mode sum not converged with {modes} modes (relative tail {tail:.3e})")]
    Truncation { modes: usize, tail: f64 },
    #[error("photon number {needed} exceeds the Fock truncation {n_max}")]
    Capacity { needed: usize, n_max: usize },
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Overflow(_)
                | Error::PoleProximity { .. }
                | Error::Resonance(_)
                | Error::Convergence(_)
                | Error::Truncation { .. }
        )
    }
}
