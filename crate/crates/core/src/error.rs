use thiserror::Error;

/// Errors shared by every analysis module.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum MeasureError {
    #[error("radius must be strictly positive, got {0}")]
    InvalidRadius(f64),
    #[error("requested scale {scale:e} is below the resolution floor {floor:e}")]
    DepthExceeded { scale: f64, floor: f64 },
    #[error("region has zero mass at the queried depth")]
    ZeroMass,
    #[error("region mass enclosure is [0, {high}]; refinement required")]
    AmbiguousMass { high: f64 },
    #[error("the origin is not in the numeric support of the measure")]
    OriginNotInSupport,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("enclosure width {width} exceeds the configured tolerance {tol}")]
    PrecisionLoss { width: f64, tol: f64 },
    #[error("operation not supported for this measure kind: {0}")]
    UnsupportedKind(String),
}

pub type Result<T> = std::result::Result<T, MeasureError>;

impl MeasureError {
    /// Stable process exit code taxonomy used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            MeasureError::InvalidParams(_)
            | MeasureError::InvalidRadius(_)
            | MeasureError::UnsupportedKind(_) => 2,
            MeasureError::PrecisionLoss { .. } => 3,
            MeasureError::ZeroMass
            | MeasureError::AmbiguousMass { .. }
            | MeasureError::OriginNotInSupport => 4,
            MeasureError::DepthExceeded { .. } => 5,
        }
    }
}
