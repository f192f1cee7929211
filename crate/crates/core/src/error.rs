//! Crate-wide error type.

/// Errors raised by geometry, sampling, training and estimation code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Metric tensor is singular or not positive definite (e.g. coincident
    /// landmarks).
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    /// The requested point lies in the cut locus of the base point.
    #[error("cut locus: {0}")]
    CutLocus(String),

    /// Operation not available for this manifold family.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Geodesic integration produced non-finite state.
    #[error("geodesic integration failed: {0}")]
    IntegrationFailure(String),

    /// Argument outside the mathematical domain (e.g. t <= 0).
    #[error("domain error: {0}")]
    Domain(String),

    /// No closed-form heat kernel for this manifold family.
    #[error("no analytic heat kernel for manifold {0}")]
    NoOracle(String),

    /// Heat-kernel series does not reach the requested tolerance at this
    /// diffusion time.
    #[error("diffusion time {t} too small for series evaluation (minimum {t_min})")]
    SmallTime { t: f64, t_min: f64 },

    /// Numerical differentiation or series evaluation produced garbage.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Array shapes do not chain.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Training diverged; the last finite checkpoint is attached.
    #[error("training diverged at epoch {epoch}")]
    TrainingFailure {
        epoch: usize,
        last_good: Box<crate::net::Checkpoint>,
    },

    /// Malformed user input (files, flags, configs).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// `true` for errors caused by bad user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::Unsupported(_)
                | Error::NoOracle(_)
                | Error::Domain(_)
                | Error::ShapeMismatch(_)
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
