use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate phase: |cos(theta)| = {abs_cos:e} is below tolerance {tol:e}")]
    DegeneratePhase { abs_cos: f64, tol: f64 },

    #[error("initial weight 0 cannot grow: the closed form is singular for rate +1")]
    InvalidInitialWeight,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("state became non-finite at t = {t:e}")]
    NonFiniteState { t: f64 },

    #[error("degenerate logistic seed {0}: must lie in (0, 1) away from fixed points")]
    DegenerateSeed(f64),

    #[error("off-diagonal element is singular: {0}")]
    SingularDenominator(&'static str),

    #[error("phase resampling exhausted after {0} attempts")]
    ResampleExhausted(usize),

    #[error("zero variance for event `{0}`: z-score undefined")]
    ZeroVariance(String),

    #[error("angle {0} rad is an endpoint of (0, pi/2)")]
    EndpointAngle(f64),

    #[error("operator `{0}` is not Hermitian")]
    NonHermitian(String),

    #[error("operator `{0}` has spectral radius {1} > 1")]
    SpectralBound(String, f64),

    #[error("interference pattern needs at least one source")]
    EmptySources,
}

pub type Result<T> = std::result::Result<T, Error>;
