//! Scalar kernels `f_n(x, z) = ((x − Φ)² + Ψ² + (z − Θ)²)^(−n/2)` and the
//! reactive integrand built from them.
//!
//! With `ρ = √b` the normalized user-to-point distance and `u = 1 / (k0 r ρ)`,
//! the squared magnitude of the Green's function bracket `1 + j u − u²` is
//! `1 − u² + u⁴`, so the reactive integrand is
//!
//! ```text
//! f_3 − f_5 / (k0 r)² + f_7 / (k0 r)⁴ = f_3 · (1 − u² + u⁴)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{positive, GainError, Result};
use crate::geometry::DirectionCosines;

/// The three kernel orders that appear in the gain integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KernelOrder {
    Three,
    Five,
    Seven,
}

impl KernelOrder {
    pub const ALL: [KernelOrder; 3] = [KernelOrder::Three, KernelOrder::Five, KernelOrder::Seven];

    pub fn n(self) -> u32 {
        match self {
            KernelOrder::Three => 3,
            KernelOrder::Five => 5,
            KernelOrder::Seven => 7,
        }
    }

    /// Position in a `[f_3, f_5, f_7]` moment triple.
    pub fn index(self) -> usize {
        match self {
            KernelOrder::Three => 0,
            KernelOrder::Five => 1,
            KernelOrder::Seven => 2,
        }
    }
}

impl TryFrom<u32> for KernelOrder {
    type Error = GainError;

    fn try_from(n: u32) -> Result<Self> {
        match n {
            3 => Ok(KernelOrder::Three),
            5 => Ok(KernelOrder::Five),
            7 => Ok(KernelOrder::Seven),
            other => Err(GainError::InvalidKernelOrder(other)),
        }
    }
}

/// Direction plus `k0·r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactiveKernelParams {
    cosines: DirectionCosines,
    k0r: f64,
}

impl ReactiveKernelParams {
    pub fn new(cosines: DirectionCosines, k0r: f64) -> Result<Self> {
        positive("k0r", k0r)?;
        Ok(Self { cosines, k0r })
    }

    pub fn cosines(&self) -> DirectionCosines {
        self.cosines
    }

    pub fn k0r(&self) -> f64 {
        self.k0r
    }

    /// Weights `[1, −1/(k0r)², 1/(k0r)⁴]` that fold a moment triple into the
    /// reactive integrand.
    pub fn moment_weights(&self) -> [f64; 3] {
        let inv2 = 1.0 / (self.k0r * self.k0r);
        [1.0, -inv2, inv2 * inv2]
    }
}

/// Squared normalized distance `b = (x − Φ)² + Ψ² + (z − Θ)²`.
#[inline]
pub fn kernel_base(x: f64, z: f64, c: &DirectionCosines) -> f64 {
    let dx = x - c.big_phi;
    let dz = z - c.big_theta;
    dx * dx + c.big_psi * c.big_psi + dz * dz
}

/// `[f_3, f_5, f_7]` from an already computed base `b`.
#[inline]
pub fn moments_from_base(b: f64) -> [f64; 3] {
    let f3 = 1.0 / (b * b.sqrt());
    let f5 = f3 / b;
    [f3, f5, f5 / b]
}

/// `[f_3, f_5, f_7]` at `(x, z)`, sharing one base evaluation.
#[inline]
pub fn kernel_moments(x: f64, z: f64, c: &DirectionCosines) -> [f64; 3] {
    moments_from_base(kernel_base(x, z, c))
}

/// `f_n(x, z)`.
pub fn f_n(x: f64, z: f64, c: &DirectionCosines, order: KernelOrder) -> f64 {
    kernel_moments(x, z, c)[order.index()]
}

/// `|1 + j u − u²|² = 1 − u² + u⁴`; never below 3/4.
#[inline]
pub fn green_magnitude_sq(u: f64) -> f64 {
    let u2 = u * u;
    1.0 - u2 + u2 * u2
}

/// `u = 1 / (k0 r ρ)` at `(x, z)`.
pub fn inverse_electrical_distance(x: f64, z: f64, params: &ReactiveKernelParams) -> f64 {
    1.0 / (params.k0r * kernel_base(x, z, &params.cosines).sqrt())
}

/// `f_3 − f_5/(k0r)² + f_7/(k0r)⁴`, evaluated as `f_3 · (1 − u² + u⁴)`.
pub fn reactive_kernel(x: f64, z: f64, params: &ReactiveKernelParams) -> f64 {
    let f3 = f_n(x, z, &params.cosines, KernelOrder::Three);
    f3 * green_magnitude_sq(inverse_electrical_distance(x, z, params))
}
