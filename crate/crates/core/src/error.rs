use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode index {mode} out of range for a space with {n_modes} modes")]
    ModeOutOfRange { mode: usize, n_modes: usize },

    #[error("invalid Fock space: {0}")]
    InvalidSpace(String),

    #[error("operators act on different Fock spaces")]
    SpaceMismatch,

    #[error("operator is not Hermitian (|A - A^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("steady-state solver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("steady state is degenerate ({dimension} null vectors below gap {gap:e})")]
    Degenerate { dimension: usize, gap: f64 },

    #[error("time step underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("dynamically unstable: {0}")]
    Unstable(String),

    #[error("truncation not converged: {0}")]
    Truncation(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("{what} did not converge after {iterations} iterations (best residual {residual:e})")]
    IterationLimit {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("memory guard: {0}")]
    MemoryGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;
