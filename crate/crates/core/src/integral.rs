//! Integral forms of the channel gain.
//!
//! For a discrete array the element sum is replaced by `∬_H (…) dx dz / ε²`
//! over `H = [−M_xε/2, M_xε/2] × [−M_zε/2, M_zε/2]`; a continuous aperture
//! integrates the same kernel over `[−L_x/2r, L_x/2r] × [−L_z/2r, L_z/2r]`
//! with prefactor `η/(8R_rad) · Ψ/(4π)` (no `A/d²`). A linear array
//! (`m_z = 1`) reduces to a single integral along `z = 0`.

use std::f64::consts::PI;

use crate::discrete::{fold_moments, kernel_params, spd_prefactor};
use crate::error::{GainError, Result};
use crate::geometry::{cap_region, spd_region, CapAperture, DirectionCosines, Medium, Rect, SpdArray, UserPosition};
use crate::kernels::{kernel_moments, moments_from_base};
use crate::quadrature::{integrate_1d, integrate_2d, PeakHint, QuadratureSpec};

/// A gain value from quadrature with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralGain {
    pub value: f64,
    pub error_estimate: f64,
    /// False when the panel budget ran out before the tolerance was met; the
    /// value is then the best available estimate.
    pub converged: bool,
}

/// `[∬f_3, ∬f_5, ∬f_7]` over a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentIntegral {
    pub moments: [f64; 3],
    pub abs_error: [f64; 3],
    pub converged: bool,
}

impl MomentIntegral {
    fn fold(&self, prefactor: f64, weights: &[f64; 3], include_reactive: bool) -> IntegralGain {
        let value = prefactor * fold_moments(&self.moments, weights, include_reactive);
        let err = if include_reactive {
            (0..3).map(|i| (weights[i] * self.abs_error[i]).abs()).sum::<f64>()
        } else {
            self.abs_error[0]
        };
        IntegralGain { value, error_estimate: prefactor * err, converged: self.converged }
    }
}

/// Integrates the three kernel moments over `rect`, seeding the panel grid
/// around the projected user point `(Φ, Θ)`.
pub fn moment_integral(rect: Rect, cosines: &DirectionCosines, spec: &QuadratureSpec) -> MomentIntegral {
    moment_integral_mapped(rect, cosines, spec, |m| m)
}

/// [`moment_integral`] with a map applied to each moment triple before
/// integration. Used by the verification suite to inject kernel faults.
pub fn moment_integral_mapped(
    rect: Rect,
    cosines: &DirectionCosines,
    spec: &QuadratureSpec,
    map: impl Fn([f64; 3]) -> [f64; 3],
) -> MomentIntegral {
    let c = *cosines;
    let hint = PeakHint { x: c.big_phi, z: c.big_theta, width: c.big_psi };
    let est = integrate_2d(move |x, z| map(kernel_moments(x, z, &c)), rect, spec, Some(hint));
    MomentIntegral { moments: est.value, abs_error: est.abs_error, converged: est.converged }
}

/// Moments over the normalized region of a discrete array.
pub fn spd_moment_integral(array: &SpdArray, user: &UserPosition, spec: &QuadratureSpec) -> MomentIntegral {
    moment_integral(spd_region(array, user).rect, &user.cosines(), spec)
}

/// Moments over the normalized region of a continuous aperture.
pub fn cap_moment_integral(aperture: &CapAperture, user: &UserPosition, spec: &QuadratureSpec) -> MomentIntegral {
    moment_integral(cap_region(aperture, user), &user.cosines(), spec)
}

/// Discrete-array gain in integral form.
pub fn spd_gain_integral(
    array: &SpdArray,
    user: &UserPosition,
    medium: &Medium,
    spec: &QuadratureSpec,
    include_reactive: bool,
) -> Result<IntegralGain> {
    let weights = kernel_params(user, medium)?.moment_weights();
    let m = spd_moment_integral(array, user, spec);
    Ok(m.fold(spd_prefactor(array, user, medium), &weights, include_reactive))
}

/// `η/(8R_rad) · Ψ/(4π)`.
pub fn cap_prefactor(user: &UserPosition, medium: &Medium) -> f64 {
    medium.radiation_factor() * user.cosines().big_psi / (4.0 * PI)
}

/// Continuous-aperture gain.
pub fn cap_gain_integral(
    aperture: &CapAperture,
    user: &UserPosition,
    medium: &Medium,
    spec: &QuadratureSpec,
    include_reactive: bool,
) -> Result<IntegralGain> {
    let weights = kernel_params(user, medium)?.moment_weights();
    let m = cap_moment_integral(aperture, user, spec);
    Ok(m.fold(cap_prefactor(user, medium), &weights, include_reactive))
}

/// Continuous-aperture gain with and without reactive terms from one panel tree.
pub fn cap_gain_pair(
    aperture: &CapAperture,
    user: &UserPosition,
    medium: &Medium,
    spec: &QuadratureSpec,
) -> Result<(IntegralGain, IntegralGain)> {
    let weights = kernel_params(user, medium)?.moment_weights();
    let m = cap_moment_integral(aperture, user, spec);
    let pre = cap_prefactor(user, medium);
    Ok((m.fold(pre, &weights, true), m.fold(pre, &weights, false)))
}

/// Linear-array gain via the single integral along the array axis:
/// `η/(8R_rad) · AΨ/(4πdr) · ∫_{−Mε/2}^{Mε/2} [f_3 − f_5/(k0r)² + f_7/(k0r)⁴](x, 0) dx`.
pub fn ula_gain_1d(
    array: &SpdArray,
    user: &UserPosition,
    medium: &Medium,
    spec: &QuadratureSpec,
) -> Result<IntegralGain> {
    if array.m_z() != 1 {
        return Err(GainError::NotLinearArray { m_z: array.m_z() });
    }
    let c = user.cosines();
    let a_sq = c.a_phi_sq();
    if a_sq <= 0.0 {
        return Err(GainError::EndfireLinearArray);
    }
    let weights = kernel_params(user, medium)?.moment_weights();
    let half = 0.5 * array.m_x() as f64 * array.spacing() / user.r();
    let est = integrate_1d(
        move |x| {
            let dx = x - c.big_phi;
            moments_from_base(dx * dx + a_sq)
        },
        -half,
        half,
        spec,
        Some((c.big_phi, a_sq.sqrt())),
    );
    let m = MomentIntegral { moments: est.value, abs_error: est.abs_error, converged: est.converged };
    let pre = medium.radiation_factor() * array.element_area() * c.big_psi / (4.0 * PI * array.spacing() * user.r());
    Ok(m.fold(pre, &weights, true))
}
