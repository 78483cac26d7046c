use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a domain invariant. `name` is the offending
    /// parameter (or config key).
    #[error("invalid {name}: {reason}")]
    Invalid { name: &'static str, reason: String },

    /// `location` is e.g. `line 3` or `--override 2`.
    #[error("config {location}: {reason}")]
    ConfigParse { location: String, reason: String },

    #[error("config {location}: unknown key `{key}`")]
    UnknownKey { location: String, key: String },

    /// The explicit scheme blew up (or produced non-finite values).
    #[error("propagation diverged at step {step} (t = {time}): max|psi| = {max_amplitude:e} exceeds {limit:e}")]
    Divergence {
        step: usize,
        time: f64,
        max_amplitude: f64,
        limit: f64,
    },

    #[error("tridiagonal solve failed: zero pivot at row {row}")]
    SingularSystem { row: usize },

    #[error("trajectory {index} left the grid at t = {time} (q = {position})")]
    TrajectoryEscaped {
        index: usize,
        time: f64,
        position: f64,
    },

    #[error("trajectory {index} entered a starved region at t = {time} (q = {position})")]
    TrajectoryStarved {
        index: usize,
        time: f64,
        position: f64,
    },

    #[error("runs are not comparable: {0}")]
    MismatchedRuns(String),

    #[error("output directory {0} is locked by another run")]
    Locked(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics (as opposed to bad input or IO).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Divergence { .. }
                | Error::SingularSystem { .. }
                | Error::TrajectoryEscaped { .. }
                | Error::TrajectoryStarved { .. }
        )
    }
}
