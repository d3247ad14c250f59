use thiserror::Error;

/// Errors raised by the numeric routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value encountered: {0}")]
    NonFiniteValue(String),
    #[error("point is not on the manifold (distance {distance:e})")]
    NotOnManifold { distance: f64 },
    #[error("only {surviving} grid points survive the exclusion; at least 10 are required")]
    ResolutionTooCoarse { surviving: usize },
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("minimal set mixes dimensions; use the general limit construction")]
    MixedDimensions,
    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),
    #[error("Monte Carlo relative standard error {relative_se:e} exceeds 1e-3")]
    MonteCarloVarianceTooHigh { relative_se: f64 },
    #[error("rejection envelope violated (ratio {ratio})")]
    EnvelopeViolation { ratio: f64 },
    #[error("acceptance rate {rate:e} below 1e-3")]
    AcceptanceTooLow { rate: f64 },
    #[error("unsupported density: {0}")]
    UnsupportedDensity(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("problem size {size} exceeds limit {limit}")]
    SizeTooLarge { size: usize, limit: usize },
    #[error("transport problem infeasible: {0}")]
    Infeasible(String),
    #[error("closed form only holds for even p (got p = {0}); use the quadrature moment instead")]
    OddOrderUnsupported(u32),
    #[error("log-log fit requires positive values (got {0})")]
    NonPositiveValue(f64),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that reject the problem definition itself rather than
    /// a numeric computation on a valid problem.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NotOnManifold { .. }
                | Error::ResolutionTooCoarse { .. }
                | Error::NotPositiveDefinite(_)
                | Error::MixedDimensions
                | Error::UnknownProblem(_)
                | Error::InvalidProblem(_)
                | Error::InvalidConfig(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
