use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("generating function has a pole at zeta = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("transfer function failed at contour index {index}: {message}")]
    TransferEvaluation { index: usize, message: String },

    #[error("transfer function not representable as a power series: {0}")]
    UnsupportedTransfer(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge: {0}")]
    NonConvergence(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("singular system at frequency index {index}")]
    SingularSystem { index: usize },

    #[error("marching-on-in-time is infeasible: the zeroth weight matrix is numerically zero in {zero_columns} of {columns} columns; use the all-at-once solver")]
    MotInfeasible { zero_columns: usize, columns: usize },

    #[error("marching-on-in-time is infeasible: the zeroth weight matrix has numerical rank {rank} < {columns}; use the all-at-once solver")]
    MotRankDeficient { rank: usize, columns: usize },

    #[error("grids are not aligned: {0}")]
    MisalignedGrids(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
