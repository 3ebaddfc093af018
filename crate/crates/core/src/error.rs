use thiserror::Error;

/// Validation failures for geometry, media and numerical settings.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GainError {
    #[error("{axis} element count must be odd (a center element is required), got {count}")]
    EvenElementCount { axis: &'static str, count: usize },

    #[error("{name} must lie strictly inside (0, pi), got {value}")]
    AngleOutOfRange { name: &'static str, value: f64 },

    #[error("{name} must be finite and positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("element spacing d = {spacing} is smaller than the element side sqrt(A) = {side}")]
    SpacingBelowElementSize { spacing: f64, side: f64 },

    #[error("direction cosines are not unit norm (|u|^2 - 1 = {deviation:e})")]
    NotUnitNorm { deviation: f64 },

    #[error("closest element is {distance} m from the user, nearer than the element side {side} m")]
    ElementTooClose { distance: f64, side: f64 },

    #[error("linear-array formula requires m_z = 1, got {m_z}")]
    NotLinearArray { m_z: usize },

    #[error("endfire linear array (a_phi = 0) is singular")]
    EndfireLinearArray,

    #[error("relative tolerance must lie in (1e-14, 1e-2), got {0}")]
    InvalidTolerance(f64),

    #[error("quadrature base order must be at least 4, got {0}")]
    InvalidBaseOrder(usize),

    #[error("panel budget must be at least 1")]
    InvalidPanelBudget,

    #[error("kernel order must be 3, 5 or 7, got {0}")]
    InvalidKernelOrder(u32),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, GainError>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(GainError::NonPositive { name, value })
    }
}
