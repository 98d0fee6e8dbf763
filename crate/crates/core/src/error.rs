use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("state is not normalized (norm squared = {0})")]
    NotNormalized(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("dimension {dim} does not factor as {a} x {b}")]
    NotFactorizable { dim: usize, a: usize, b: usize },

    #[error("time {t} s outside [0, {duration}] s")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("invalid gate spec: {0}")]
    InvalidSpec(String),

    #[error("unknown gate name {0:?}")]
    UnknownGate(String),

    #[error("integrator did not converge: error estimate {estimate:e} > tolerance {tol:e} after {substeps} substeps per sample")]
    NonConvergence {
        estimate: f64,
        tol: f64,
        substeps: usize,
    },

    #[error("all measurement counts are zero")]
    DegenerateCounts,

    #[error("decay fit did not converge (residual {residual:e})")]
    FitNonConvergence { residual: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
