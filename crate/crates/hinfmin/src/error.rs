//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by system evaluation, norm computation, and optimization.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix or vector dimensions are inconsistent.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The pencil s E(mu) - A(mu) is numerically singular at the requested
    /// point, which signals evaluation at or near a pole, or an irregular
    /// pencil.
    #[error("singular pencil at mu = {mu:?}, omega = {omega}: {detail}")]
    SingularPencil {
        mu: Vec<f64>,
        omega: f64,
        detail: String,
    },

    /// Derivatives were requested at a point where the largest singular value
    /// coalesces with the second largest.
    #[error("largest singular value is not simple (sigma = {sigma}, sigma2 = {sigma2})")]
    NonSimple { sigma: f64, sigma2: f64 },

    /// The reduced pencil is irregular over the probed points. No
    /// regularization is attempted; the projection bases must be rebuilt.
    #[error("irregular reduced pencil: {0}")]
    IrregularPencil(String),

    /// The dense eigenvalue solver failed or produced non-finite output.
    #[error("eigenvalue solver failure: {0}")]
    EigFailure(String),

    /// An iteration limit was reached before the convergence test passed.
    #[error("{what} exceeded {limit} iterations (best value so far: {best})")]
    MaxIterExceeded {
        what: String,
        limit: usize,
        best: f64,
    },

    /// The optimizer could not make progress from any start.
    #[error("optimizer failure: {0}")]
    OptimizerFailure(String),

    /// Invalid argument or option value.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A user-supplied coefficient callback failed (returned non-finite).
    #[error("coefficient evaluation failed at mu = {mu:?}: {detail}")]
    CoefficientFailure { mu: Vec<f64>, detail: String },

    /// Parse error in an external file, with 1-based line number.
    #[error("{path}:{line}: {detail}")]
    Parse {
        path: String,
        line: usize,
        detail: String,
    },

    /// Aggregated configuration validation errors.
    #[error("invalid problem configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
