use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M*| = {residual:.3e})")]
    NonHermitian { residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("invalid map parameters: {0}")]
    InvalidParams(String),

    #[error("theta = {theta} is outside 0 < |theta| < pi/3")]
    ThetaOutOfRange { theta: f64 },

    #[error("p_theta = {p_theta} is outside the supported open interval (1, 2)")]
    UnsupportedTheta { p_theta: f64 },

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("negative input to F: ({x}, {y}, {z})")]
    NegativeInput { x: f64, y: f64, z: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("{0} is not a face of the convex body")]
    NotAFace(String),

    #[error("the map is not positive")]
    NotPositiveMap,

    #[error("unsupported case: {0}")]
    UnsupportedCase(String),

    #[error("value {value} is outside the open interval ({lo}, {hi})")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("no choice of alpha~ detects the edge state (best pairing {best:.6e})")]
    NoDetectingChoice { best: f64 },
}
