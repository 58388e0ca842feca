use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("metric is not positive definite: {0}")]
    SingularMetric(String),

    #[error("denominator of {0} vanishes at the evaluation point")]
    PoleAtPoint(String),

    #[error("point lies outside the chart domain: {0}")]
    OutOfDomain(String),

    #[error("finite-difference stencil leaves the chart domain")]
    StencilOutOfDomain,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("coupling constant kappa must be nonzero")]
    InvalidKappa,

    #[error("curvature is not harmonic at sample {sample} (divergence defect {defect:e})")]
    NotHarmonic { sample: usize, defect: f64 },

    #[error("background is not Einstein (defect {0:e})")]
    NotEinstein(f64),

    #[error("deformation is not transverse-traceless: {0}")]
    NotTT(String),

    #[error("structure constants violate the Jacobi identity (defect {0:e})")]
    JacobiViolated(f64),

    #[error("structure constants are not antisymmetric")]
    NotAntisymmetric,

    #[error("degenerate left-invariant metric: {0}")]
    DegenerateMetric(String),

    #[error("dilaton exponential e^(2 phi) must be positive, got {0}")]
    NonpositiveDilaton(String),

    #[error("value is not representable in exact mode: {0}")]
    Transcendental(String),

    #[error("jet of order {have} is too short, order {need} required")]
    JetOrder { have: usize, need: usize },

    #[error("field class not supported on this chart: {0}")]
    UnsupportedField(String),

    #[error("solver stopped after {iterations} iterations (best objective {best:e})")]
    MaxIterations { iterations: usize, best: f64 },

    #[error("normal equations stayed singular after damping up to {0:e}")]
    SingularJacobian(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
