//! Closed-form channel gains: large-aperture limits for planar, continuous and
//! linear arrays, the finite linear-array gain, and the reactive/radiating ratios.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{positive, GainError, Result};
use crate::geometry::{Medium, SpdArray, UserPosition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainFamily {
    UpaEva,
    UpaRad,
    CapEva,
    CapRad,
    UlaEva,
    UlaRad,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticGain {
    pub value: f64,
    pub family: GainFamily,
}

/// `1/2 − q/(24π²) + q²/(160π⁴)` with `q = (λ / rΨ)²`; `1/2` without reactive terms.
fn planar_limit_shape(user: &UserPosition, medium: &Medium, include_reactive: bool) -> f64 {
    if !include_reactive {
        return 0.5;
    }
    let q = (medium.lambda() / user.perpendicular_distance()).powi(2);
    let pi2 = PI * PI;
    0.5 - q / (24.0 * pi2) + q * q / (160.0 * pi2 * pi2)
}

/// Limit of the planar discrete-array gain as `M_x, M_z → ∞`:
/// `η/(8R_rad) · μ_oc · (1/2 − (λ/rΨ)²/(24π²) + (λ/rΨ)⁴/(160π⁴))`.
pub fn upa_asymptotic(
    user: &UserPosition,
    medium: &Medium,
    mu_oc: f64,
    include_reactive: bool,
) -> Result<AsymptoticGain> {
    positive("occupation ratio", mu_oc)?;
    if mu_oc > 1.0 {
        return Err(GainError::Config(format!("occupation ratio must not exceed 1, got {mu_oc}")));
    }
    let value = medium.radiation_factor() * mu_oc * planar_limit_shape(user, medium, include_reactive);
    let family = if include_reactive { GainFamily::UpaEva } else { GainFamily::UpaRad };
    Ok(AsymptoticGain { value, family })
}

/// Limit of the continuous-aperture gain as `L_x, L_z → ∞`; the planar limit
/// at full occupation.
pub fn cap_asymptotic(user: &UserPosition, medium: &Medium, include_reactive: bool) -> AsymptoticGain {
    let value = medium.radiation_factor() * 1.0 * planar_limit_shape(user, medium, include_reactive);
    let family = if include_reactive { GainFamily::CapEva } else { GainFamily::CapRad };
    AsymptoticGain { value, family }
}

/// Reactive-over-radiating ratio of the planar limits.
pub fn ratio_spd(user: &UserPosition, medium: &Medium) -> f64 {
    ratio_spd_from_perpendicular(user.perpendicular_distance(), medium.lambda())
}

/// `1 − (λ/rΨ)²/(12π²) + (λ/rΨ)⁴/(80π⁴)` as a function of the perpendicular
/// distance `rΨ`.
pub fn ratio_spd_from_perpendicular(r_psi: f64, lambda: f64) -> f64 {
    1.0 + ratio_spd_excess(r_psi, lambda)
}

/// `ratio_spd − 1`, evaluated without the leading 1.
pub fn ratio_spd_excess(r_psi: f64, lambda: f64) -> f64 {
    let q = (lambda / r_psi).powi(2);
    let pi2 = PI * PI;
    -q / (12.0 * pi2) + q * q / (80.0 * pi2 * pi2)
}

/// Perpendicular distance `√(3/20)·λ/π` beyond which the reactive terms reduce the gain.
pub fn ratio_spd_threshold(lambda: f64) -> f64 {
    (3.0f64 / 20.0).sqrt() * lambda / PI
}

fn linear_array_a_sq(user: &UserPosition) -> Result<f64> {
    let a_sq = user.cosines().a_phi_sq();
    if a_sq > 0.0 {
        Ok(a_sq)
    } else {
        Err(GainError::EndfireLinearArray)
    }
}

/// Antiderivative terms of `f_3`, `f_5`, `f_7` along a linear array, at offset `x`.
fn ula_bracket(x: f64, a_sq: f64, inv_k0r_sq: f64) -> f64 {
    let x2 = x * x;
    let s = x2 + a_sq;
    let root = s.sqrt();
    let a4 = a_sq * a_sq;
    let t3 = x / (a_sq * root);
    let t5 = x * (3.0 * a_sq + 2.0 * x2) / (3.0 * a4 * s * root);
    let t7 = x * (15.0 * a4 + 20.0 * a_sq * x2 + 8.0 * x2 * x2) / (15.0 * a4 * a_sq * s * s * root);
    t3 - inv_k0r_sq * t5 + inv_k0r_sq * inv_k0r_sq * t7
}

/// Finite linear-array gain (`m_z = 1`) in closed form:
/// `η/(8R_rad) · AΨ/(4πdr) · Σ_{x ∈ {Mε/2 ± Φ}} bracket(x)`.
pub fn ula_gain_closed(array: &SpdArray, user: &UserPosition, medium: &Medium) -> Result<f64> {
    if array.m_z() != 1 {
        return Err(GainError::NotLinearArray { m_z: array.m_z() });
    }
    let a_sq = linear_array_a_sq(user)?;
    let c = user.cosines();
    let k0r = medium.wavenumber() * user.r();
    let inv = 1.0 / (k0r * k0r);
    let half = 0.5 * array.m_x() as f64 * array.spacing() / user.r();
    let sum = ula_bracket(half + c.big_phi, a_sq, inv) + ula_bracket(half - c.big_phi, a_sq, inv);
    let pre = medium.radiation_factor() * array.element_area() * c.big_psi / (4.0 * PI * array.spacing() * user.r());
    Ok(pre * sum)
}

/// Limit of the linear-array gain as `M → ∞`:
/// `η/(8R_rad) · AΨ/(2πdr a_Φ²) · (1 − (2/3)/(k0²r²a_Φ²) + (8/15)/(k0⁴r⁴a_Φ⁴))`.
pub fn ula_asymptotic(
    user: &UserPosition,
    medium: &Medium,
    d: f64,
    a: f64,
    include_reactive: bool,
) -> Result<AsymptoticGain> {
    positive("d", d)?;
    positive("element area", a)?;
    let a_sq = linear_array_a_sq(user)?;
    let psi = user.cosines().big_psi;
    let base = medium.radiation_factor() * a * psi / (2.0 * PI * d * user.r() * a_sq);
    let (value, family) = if include_reactive {
        (base * ula_reactive_factor(user, medium, a_sq), GainFamily::UlaEva)
    } else {
        (base, GainFamily::UlaRad)
    };
    Ok(AsymptoticGain { value, family })
}

fn ula_reactive_factor(user: &UserPosition, medium: &Medium, a_sq: f64) -> f64 {
    let k = medium.wavenumber() * user.r();
    let v = 1.0 / (k * k * a_sq);
    1.0 - (2.0 / 3.0) * v + (8.0 / 15.0) * v * v
}

/// Reactive-over-radiating ratio of the linear-array limits.
pub fn ula_ratio(user: &UserPosition, medium: &Medium) -> Result<f64> {
    let a_sq = linear_array_a_sq(user)?;
    Ok(ula_reactive_factor(user, medium, a_sq))
}
