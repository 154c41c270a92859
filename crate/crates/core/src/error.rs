use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("matrix is singular to working precision")]
    SingularMatrix,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("Lyapunov equation has no equilibrium solution")]
    NoEquilibrium,

    #[error("outside the domain of the log-det shortcut: {0}")]
    Domain(String),

    #[error("Jacobi sweeps did not converge after {0} sweeps")]
    NotConverged(usize),

    #[error("target increment is outside the conic hull of the source family")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("capacity {capacity_bits} bits cannot be met even at dt = {dt_min}")]
    CapacityInfeasible { capacity_bits: f64, dt_min: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
