use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller violated an API precondition (mismatched jets, bad sizes, ...).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("division by a jet with zero value part")]
    DivisionByZero,

    #[error("branch point: {0}")]
    BranchPoint(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge within {terms} terms ({what})")]
    Convergence { what: String, terms: usize },

    /// A spectral index sits on (or too close to) a Rayleigh/Wood anomaly.
    #[error("Wood anomaly: |k~_{m}| = {magnitude:e} at omega = {omega}")]
    WoodAnomaly { m: i64, magnitude: f64, omega: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("singular system matrix at omega = {omega}")]
    SingularMatrix { omega: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("rational surrogate evaluated at a pole (omega = {omega})")]
    PoleHit { omega: f64 },

    #[error("root finder did not converge after {iterations} iterations")]
    RootFinder { iterations: usize },

    #[error("degenerate Padé degree: {0}")]
    DegenerateDegree(String),

    #[error("accuracy indicator undefined: |T^({order})| = 0")]
    IndicatorUndefined { order: usize },

    #[error("partition exceeded {cap} subbands")]
    Runaway { cap: usize },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    /// Wraps a solver failure with the frequency it happened at.
    #[error("at omega = {omega}: {source}")]
    AtFrequency {
        omega: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn at(self, omega: f64) -> Self {
        match self {
            e @ Error::AtFrequency { .. } => e,
            e => Error::AtFrequency {
                omega,
                source: Box::new(e),
            },
        }
    }
}
