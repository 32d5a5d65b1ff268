use thiserror::Error;

/// Errors produced by the law, discretization, solver and reporting layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid law: {0}")]
    InvalidLaw(String),

    #[error("root solve of s*g(s) = {xi:e} did not converge (residual {residual:e})")]
    RootSolve { xi: f64, residual: f64 },

    #[error("adaptive quadrature did not reach tolerance on [{lo:e}, {hi:e}]")]
    Quadrature { lo: f64, hi: f64 },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("normal flux {flux:e} on boundary edge {edge} violates the zero-flux constraint")]
    BoundaryFlux { edge: usize, flux: f64 },

    #[error(
        "Picard iteration did not converge at t = {t}: {iterations} iterations, \
         last increment {increment:e}, residual {residual:e}"
    )]
    PicardNonConvergence {
        t: f64,
        iterations: usize,
        increment: f64,
        residual: f64,
    },

    #[error("linear solve failed: {0}")]
    LinearSolver(String),

    #[error("time grid: {0}")]
    TimeGrid(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical machinery (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RootSolve { .. }
                | Error::Quadrature { .. }
                | Error::PicardNonConvergence { .. }
                | Error::LinearSolver(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
