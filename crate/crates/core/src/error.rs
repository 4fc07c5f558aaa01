use thiserror::Error;

/// Errors shared by every solver and estimator in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Conditioning on survival became meaningless: the surviving
    /// mass/norm dropped below the representable threshold.
    #[error("degenerate conditioning at t = {at_time}: surviving mass {mass:.3e}")]
    DegenerateConditioning { at_time: f64, mass: f64 },

    /// Mass reached the artificial edge of the finite computational box
    /// standing in for an unbounded domain.
    #[error("support guard tripped in {context}: mass {mass:.3e} in the guard margin exceeds {threshold:.1e}")]
    SupportGuard {
        context: &'static str,
        mass: f64,
        threshold: f64,
    },

    /// Every walker left the domain in a single step (dt too large).
    #[error("ensemble collapse at step {step}: all {n} walkers exited")]
    EnsembleCollapse { step: u64, n: usize },

    /// A solver's internal conservation check failed, signalling that the
    /// requested step size is too coarse for the scheme.
    #[error("scheme consistency violated: mass drift {drift:.3e} exceeds {limit:.3e} (dt too large)")]
    SchemeConsistency { drift: f64, limit: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("accuracy failure: {0}")]
    Accuracy(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
