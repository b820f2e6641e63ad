use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A Gamma-function pole (non-positive integer argument).
    #[error("pole of the Gamma function at x = {0}")]
    Pole(f64),
    /// Invalid model parameters.
    #[error("invalid parameters: {0}")]
    Params(String),
    /// Fields live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    /// Negative power of the unshifted operator applied to a field with nonzero mean.
    #[error("singular operator: {0}")]
    Singular(String),
    /// The lattice-sum truncation cannot meet the requested tolerance.
    #[error("truncation error: tail bound {tail_bound:e} exceeds tolerance {tolerance:e}")]
    Truncation { tail_bound: f64, tolerance: f64 },
    /// A root bracket or iteration failed.
    #[error("non-convergence: {0}")]
    NonConvergence(String),
    /// A computed quantity misses its required tolerance.
    #[error("tolerance failure: {0}")]
    Tolerance(String),
    /// Stability restriction on the time step.
    #[error("CFL violation: dt = {dt:e} exceeds limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },
    /// Solution blew up during time stepping.
    #[error("blow-up: {0}")]
    BlowUp(String),
    /// Malformed field file.
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
