use thiserror::Error;

/// Errors raised by the hand toolkit.
#[derive(Debug, Error)]
pub enum HandError {
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("guide angle {angle_deg}° on tendon `{tendon}` must lie in [0°, 90°)")]
    GuideAngleOutOfRange { tendon: String, angle_deg: f64 },

    #[error("tendon `{tendon}` references unknown joint `{joint}`")]
    DanglingJoint { tendon: String, joint: String },

    #[error("posture has {got} angles, hand has {expected} joint axes")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("command has {got} values, hand has {expected} tendons")]
    CommandDimension { expected: usize, got: usize },

    #[error("tendon `{tendon}` tension {value} N is negative")]
    NegativeTension { tendon: String, value: f64 },

    #[error("operation requires a {expected}-mode command")]
    WrongMode { expected: &'static str },

    #[error(
        "commanded excursion {commanded:.4} mm on tendon `{tendon}` exceeds its limit excursion {limit:.4} mm"
    )]
    InfeasibleExcursion {
        tendon: String,
        commanded: f64,
        limit: f64,
    },

    #[error("joint `{joint}` axis {axis} has zero range between rest and limit")]
    ZeroRange { joint: String, axis: usize },

    #[error("calibration dataset is missing the (hole={hole}, wrinkle={wrinkle}) variant")]
    MissingVariant { hole: bool, wrinkle: bool },

    #[error("calibration dataset has a non-positive tension {0} N")]
    NonPositiveTension(f64),

    #[error("damping calibration failed: {0}")]
    DampingCalibration(String),

    #[error("time step {0} s is outside (0, 1e-3]")]
    BadTimeStep(f64),

    #[error("dynamic state is not finite")]
    NonFiniteState,

    #[error("impulse did not settle within {0} s")]
    NoSettle(f64),

    #[error("equilibrium result has no contacts")]
    NoContacts,

    #[error("invalid object `{0}`: dimensions must be positive")]
    InvalidObject(String),

    #[error("dial scenario: {0}")]
    Dial(String),

    #[error("invalid hand configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HandError>;
