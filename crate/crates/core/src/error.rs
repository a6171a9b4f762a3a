use thiserror::Error;

/// Errors raised by the solvers, kernels and the sweep harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid too coarse: spacing {h:.3e} does not resolve epsilon {eps:.3e} with {min_points} points per period")]
    GridTooCoarse { h: f64, eps: f64, min_points: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("kernel ({p},{q}) ill-conditioned: moment residual {residual:.3e}")]
    IllConditioned { p: usize, q: usize, residual: f64 },

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("implicit midpoint fixed-point iteration diverged after {iterations} iterations (increment {increment:.3e})")]
    FixedPointDiverged { iterations: usize, increment: f64 },

    #[error("degenerate initial data: |m| = {norm:.3e} at node {node}")]
    DegenerateData { norm: f64, node: usize },

    #[error("dense eigensolve too large: {size} unknowns exceeds {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("averaging window [-{mu}, {mu}] does not fit in a periodic domain of length {ell}")]
    WindowExceedsDomain { mu: f64, ell: f64 },

    #[error("invalid averaging window: {0}")]
    InvalidWindow(String),

    #[error("invalid step control: {0}")]
    InvalidStep(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    ConfigInvalid(Vec<String>),

    #[error("degenerate rate fit: {0}")]
    Degenerate(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed data: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by user input (configuration, arguments, files)
    /// rather than by a numerical failure.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::ConfigInvalid(_)
                | Error::InvalidArgument(_)
                | Error::InvalidWindow(_)
                | Error::InvalidStep(_)
                | Error::InvalidGrid(_)
                | Error::WindowExceedsDomain { .. }
                | Error::Io(_)
                | Error::Parse(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
