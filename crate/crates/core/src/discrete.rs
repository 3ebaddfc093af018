//! Channel gain of a discrete array by direct summation over its elements,
//! and the far-field (planar-wave) comparison model.
//!
//! Each element contributes `ε²·[f_3 − f_5/(k0r)² + f_7/(k0r)⁴]` evaluated at
//! its normalized center `(m_x ε, m_z ε)`; the sum is scaled by
//! `η/(8R_rad) · AΨ/(4πd²)`. The three kernel moments are summed separately so
//! one pass yields both the reactive and the radiating-only gain.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{GainError, Result};
use crate::geometry::{closest_element_distance, Medium, SpdArray, UserPosition};
use crate::kernels::{moments_from_base, ReactiveKernelParams};
use crate::summation::{pairwise_sum, pairwise_sum_slice};

/// Gains of one configuration under the three propagation models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainBreakdown {
    pub with_reactive: f64,
    pub radiating_only: f64,
    pub far_field: f64,
    pub ratio_eva_over_rad: f64,
}

/// `Σ ε²·[f_3, f_5, f_7]` over all elements.
///
/// Rows (fixed `m_x`) are summed pairwise, possibly in parallel, and the row
/// totals are then combined pairwise in index order, so the result does not
/// depend on the thread count.
pub fn spd_moment_sums(array: &SpdArray, user: &UserPosition) -> Result<[f64; 3]> {
    let side = array.element_area().sqrt();
    let closest = closest_element_distance(array, user);
    if closest < side {
        return Err(GainError::ElementTooClose { distance: closest, side });
    }

    let c = user.cosines();
    let eps = array.spacing() / user.r();
    let hx = array.half_count_x();
    let hz = array.half_count_z();
    let psi_sq = c.big_psi * c.big_psi;
    let dz_sq: Vec<f64> = (-hz..=hz)
        .map(|mz| {
            let dz = mz as f64 * eps - c.big_theta;
            dz * dz
        })
        .collect();

    let row_sum = |mx: i64| -> [f64; 3] {
        let dx = mx as f64 * eps - c.big_phi;
        let lead = dx * dx + psi_sq;
        pairwise_sum(dz_sq.len(), |j| moments_from_base(lead + dz_sq[j]))
    };
    let rows: Vec<[f64; 3]> = if array.element_count() >= 1 << 14 {
        (-hx..=hx).into_par_iter().map(row_sum).collect()
    } else {
        (-hx..=hx).map(row_sum).collect()
    };
    let eps_sq = eps * eps;
    Ok(pairwise_sum_slice(&rows).map(|s| s * eps_sq))
}

/// `η/(8R_rad) · AΨ/(4πd²)`, the factor in front of the normalized sum.
pub fn spd_prefactor(array: &SpdArray, user: &UserPosition, medium: &Medium) -> f64 {
    let d = array.spacing();
    medium.radiation_factor() * array.element_area() * user.cosines().big_psi / (4.0 * PI * d * d)
}

/// Folds a moment triple into a gain, with or without the reactive terms.
pub(crate) fn fold_moments(moments: &[f64; 3], weights: &[f64; 3], include_reactive: bool) -> f64 {
    if include_reactive {
        moments[0] * weights[0] + moments[1] * weights[1] + moments[2] * weights[2]
    } else {
        moments[0]
    }
}

pub(crate) fn kernel_params(user: &UserPosition, medium: &Medium) -> Result<ReactiveKernelParams> {
    ReactiveKernelParams::new(user.cosines(), medium.wavenumber() * user.r())
}

/// Channel gain by summation over all elements.
///
/// Fails with [`GainError::ElementTooClose`] when some element center is
/// nearer to the user than the element side `√A`; the constant-field-per-element
/// model does not hold there.
pub fn spd_gain_sum(array: &SpdArray, user: &UserPosition, medium: &Medium, include_reactive: bool) -> Result<f64> {
    let moments = spd_moment_sums(array, user)?;
    let weights = kernel_params(user, medium)?.moment_weights();
    Ok(spd_prefactor(array, user, medium) * fold_moments(&moments, &weights, include_reactive))
}

/// Far-field gain `η/(8R_rad) · AΨ/(4πr²) · M`. Grows without bound in `M`.
pub fn far_field_gain(array: &SpdArray, user: &UserPosition, medium: &Medium) -> f64 {
    let r = user.r();
    medium.radiation_factor() * array.element_area() * user.cosines().big_psi / (4.0 * PI * r * r)
        * array.element_count() as f64
}

pub fn gain_breakdown(array: &SpdArray, user: &UserPosition, medium: &Medium) -> Result<GainBreakdown> {
    let moments = spd_moment_sums(array, user)?;
    let weights = kernel_params(user, medium)?.moment_weights();
    let pre = spd_prefactor(array, user, medium);
    let with_reactive = pre * fold_moments(&moments, &weights, true);
    let radiating_only = pre * fold_moments(&moments, &weights, false);
    Ok(GainBreakdown {
        with_reactive,
        radiating_only,
        far_field: far_field_gain(array, user, medium),
        ratio_eva_over_rad: with_reactive / radiating_only,
    })
}
