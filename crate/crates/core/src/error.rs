//! Error type shared by all solver layers.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error("NNLS did not converge after {iterations} iterations (KKT residual {residual:.3e})")]
    Solver { iterations: usize, residual: f64 },

    #[error(
        "elastic correction did not converge at g_n = {g_n} after {} iterations; \
         pressure history {history:?}",
        history.len()
    )]
    Correction { g_n: f64, history: Vec<f64> },

    #[error("Newton solver diverged at step {step}; residual trace {trace:?}")]
    Nonconvergence { step: usize, trace: Vec<f64> },

    #[error("degenerate fit: {0}")]
    Fit(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error(
        "dense influence path refused at n = {n}: {cells} cells would need {gib:.1} GiB; \
         enable the matrix-free path"
    )]
    DensePathRefused { n: u32, cells: usize, gib: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Attaches the Gauss-point index to errors crossing the coupling boundary.
pub fn tag_gauss_point(err: Error, gp: usize) -> Error {
    match err {
        Error::Parameter(m) => Error::Parameter(format!("gauss point {gp}: {m}")),
        Error::Solver { iterations, residual } => Error::Parameter(format!(
            "gauss point {gp}: NNLS failed after {iterations} iterations (KKT {residual:.3e})"
        )),
        Error::Correction { g_n, history } => Error::Parameter(format!(
            "gauss point {gp}: correction failed at g_n = {g_n} with history {history:?}"
        )),
        other => other,
    }
}

pub type Result<T> = std::result::Result<T, Error>;
