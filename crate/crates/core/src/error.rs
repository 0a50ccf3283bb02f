use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid lattice spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Every weight of a state-defining function vanished on the spectrum.
    #[error("function is zero on every eigenvalue")]
    DegenerateFunction,

    #[error("projector has an empty range")]
    EmptySubspace,

    #[error("invalid energy window [{eps_min}, {eps_max}]: {reason}")]
    InvalidWindow {
        eps_min: f64,
        eps_max: f64,
        reason: String,
    },

    #[error("window too tight: {accepted} of {proposals} proposals accepted")]
    WindowTooTight { accepted: usize, proposals: usize },

    #[error("arbitration starved after {attempts} attempts (best cost {best_cost:.3e}, collected {collected})")]
    ArbitrationStarved {
        attempts: usize,
        collected: usize,
        best_cost: f64,
    },

    #[error("sampling interval {t_samp:.4e} is not below the aliasing limit {limit:.4e}")]
    Aliasing { t_samp: f64, limit: f64 },

    #[error("insufficient spectral resolution: grid length {grid_length:.4e} shorter than {required:.4e}")]
    Resolution { grid_length: f64, required: f64 },

    #[error("empty sample set")]
    EmptySamples,

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures that come from numerics rather than from inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NumericFailure(_) | Error::Resolution { .. } | Error::ArbitrationStarved { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
