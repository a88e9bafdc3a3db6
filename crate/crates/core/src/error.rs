use thiserror::Error;

/// Errors raised by the library and mapped onto CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sector with {particles} particles has dimension {dim}, above the guard of {limit}")]
    DimensionGuard {
        particles: usize,
        dim: usize,
        limit: usize,
    },

    #[error("eigendecomposition did not converge for a block of dimension {0}")]
    Eigen(usize),

    #[error("quadrature error estimate {estimate:e} did not reach tolerance {tol:e}")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) | Error::Io(_) => 1,
            Error::Eigen(_) | Error::Quadrature { .. } => 2,
            Error::DimensionGuard { .. } => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
