use thiserror::Error;

/// Errors raised by the numerical kernels and model constructors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare { op: &'static str, rows: usize, cols: usize },
    #[error("{what} is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { what: &'static str, deviation: f64 },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("Lie closure did not stabilize within {depth} bracket levels")]
    MaxDepth { depth: usize },
    #[error("superoperator is not unital (residual {residual:.3e})")]
    NotUnital { residual: f64 },
    #[error("map is not completely positive (min Choi eigenvalue {min_eig:.3e})")]
    NotCp { min_eig: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
