use std::path::PathBuf;

/// Errors raised by mesh construction, assembly and time stepping.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A mesh file could not be parsed or violates the mesh invariants.
    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// An exact-solution evaluation outside its validity range.
    #[error("outside the domain of the exact solution: {0}")]
    Domain(String),

    /// A factorization hit a zero (or non-positive) pivot.
    #[error("singular matrix: zero pivot in row {row}")]
    Singular { row: usize },

    /// Newton iteration did not reach the requested residual.
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    /// The state stopped being finite.
    #[error("state became non-finite")]
    NonFinite,

    /// A time step failed; carries the 1-based index of the failing step.
    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
