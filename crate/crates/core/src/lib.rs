//! Near-field channel gain of planar and linear antenna arrays.
//!
//! A discrete array of `M_x × M_z` small elements ([`SpdArray`]) or a continuous
//! aperture ([`CapAperture`]) receives from a point source at distance `r` and
//! direction `(θ, φ)`. Gains are available by direct summation
//! ([`discrete`]), adaptive integration ([`integral`]) and closed-form
//! large-aperture limits ([`closed_forms`]), with and without the reactive
//! near-field terms of the dyadic Green's function.

pub mod closed_forms;
pub mod discrete;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod integral;
pub mod kernels;
pub mod oracle;
pub mod quadrature;
pub mod summation;

pub use closed_forms::{
    cap_asymptotic, ratio_spd, ula_asymptotic, ula_gain_closed, upa_asymptotic, AsymptoticGain, GainFamily,
};
pub use discrete::{far_field_gain, gain_breakdown, spd_gain_sum, GainBreakdown};
pub use error::{GainError, Result};
pub use geometry::{CapAperture, DirectionCosines, Medium, Rect, Scenario, SpdArray, UserPosition};
pub use integral::{cap_gain_integral, spd_gain_integral, ula_gain_1d, IntegralGain};
pub use kernels::KernelOrder;
pub use quadrature::QuadratureSpec;
