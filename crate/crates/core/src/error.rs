use thiserror::Error;

use crate::algebra::AlgebraTag;

#[derive(Debug, Error)]
pub enum Error {
    #[error("algebra mismatch: {0} vs {1}")]
    TagMismatch(AlgebraTag, AlgebraTag),

    #[error("the spin factor {0} has no division-algebra arithmetic")]
    SpinFactorArithmetic(AlgebraTag),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid algebra/size combination: {0}")]
    InvalidConfig(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("{0} carries no linear complex structures")]
    NoComplexStructure(AlgebraTag),

    #[error("operation requires the chart origin as base point")]
    NotOrigin,

    #[error("frame is not orthonormal (residual {0:.3e})")]
    NonOrthonormal(f64),

    #[error("finite differences did not converge: {0}")]
    NonConvergence(String),

    #[error("flow left the chart domain at t = {0}")]
    LeftChart(f64),

    #[error("singular-value threshold is ambiguous (gap ratio {0:.3e})")]
    ThresholdAmbiguity(f64),

    #[error("operator is not a derivation (residual {0:.3e})")]
    NotDerivation(f64),

    #[error("isotropy evaluation is not a scaled isometry (relative spread {0:.3e})")]
    RescalingFailure(f64),

    #[error("frame spec: {0}")]
    FrameSpec(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
