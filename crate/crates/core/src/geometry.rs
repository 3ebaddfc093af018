//! Array and user geometry.
//!
//! The receive array lies in the x–z plane, centered at the origin, with its
//! normal along +y. The user sits at `r·(Φ, Ψ, Θ)`. Every integral in the crate
//! is taken in coordinates normalized by `r`, so an element at index
//! `(m_x, m_z)` sits at `(m_x·ε, m_z·ε)` with `ε = d / r`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{positive, GainError, Result};

/// Unit vector from the array center towards the user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionCosines {
    /// cos φ · sin θ
    pub big_phi: f64,
    /// sin φ · sin θ, the cosine against the array normal
    pub big_psi: f64,
    /// cos θ
    pub big_theta: f64,
}

impl DirectionCosines {
    /// Builds the cosines from elevation `theta` and azimuth `phi`, both in (0, π).
    pub fn from_angles(theta: f64, phi: f64) -> Result<Self> {
        open_angle("theta", theta)?;
        open_angle("phi", phi)?;
        let (sin_t, cos_t) = theta.sin_cos();
        let (sin_p, cos_p) = phi.sin_cos();
        let cosines = Self { big_phi: cos_p * sin_t, big_psi: sin_p * sin_t, big_theta: cos_t };
        if cosines.big_psi <= 0.0 {
            // sin of an angle just inside (0, π) can still round to zero
            return Err(GainError::AngleOutOfRange { name: "phi", value: phi });
        }
        Ok(cosines)
    }

    /// Builds the cosines from explicit components; they must form a unit
    /// vector within 1e-12 and have `big_psi > 0`.
    pub fn from_components(big_phi: f64, big_psi: f64, big_theta: f64) -> Result<Self> {
        let deviation = big_phi * big_phi + big_psi * big_psi + big_theta * big_theta - 1.0;
        if !deviation.is_finite() || deviation.abs() > 1e-12 {
            return Err(GainError::NotUnitNorm { deviation });
        }
        positive("big_psi", big_psi)?;
        Ok(Self { big_phi, big_psi, big_theta })
    }

    /// Broadside user, `(0, 1, 0)`.
    pub fn broadside() -> Self {
        Self { big_phi: 0.0, big_psi: 1.0, big_theta: 0.0 }
    }

    /// `a_Φ² = 1 − Φ² = Ψ² + Θ²`, the squared distance scale of a linear array along x.
    pub fn a_phi_sq(&self) -> f64 {
        self.big_psi * self.big_psi + self.big_theta * self.big_theta
    }

    pub fn norm_sq(&self) -> f64 {
        self.big_phi * self.big_phi + self.big_psi * self.big_psi + self.big_theta * self.big_theta
    }
}

/// Free function form of [`DirectionCosines::from_angles`].
pub fn direction_cosines(theta: f64, phi: f64) -> Result<DirectionCosines> {
    DirectionCosines::from_angles(theta, phi)
}

fn open_angle(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 && value < PI {
        Ok(value)
    } else {
        Err(GainError::AngleOutOfRange { name, value })
    }
}

/// User location in spherical coordinates around the array center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserPosition {
    r: f64,
    theta: f64,
    phi: f64,
    cosines: DirectionCosines,
}

impl UserPosition {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        positive("r", r)?;
        let cosines = DirectionCosines::from_angles(theta, phi)?;
        Ok(Self { r, theta, phi, cosines })
    }

    /// A user at distance `r` in an explicitly given direction. The angles are
    /// recovered from the cosines.
    pub fn from_cosines(r: f64, cosines: DirectionCosines) -> Result<Self> {
        positive("r", r)?;
        let c = DirectionCosines::from_components(cosines.big_phi, cosines.big_psi, cosines.big_theta)?;
        let theta = c.big_theta.clamp(-1.0, 1.0).acos();
        let phi = c.big_psi.atan2(c.big_phi);
        Ok(Self { r, theta, phi, cosines: c })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn cosines(&self) -> DirectionCosines {
        self.cosines
    }

    /// Perpendicular distance `rΨ` from the user to the array plane.
    pub fn perpendicular_distance(&self) -> f64 {
        self.r * self.cosines.big_psi
    }

    /// Cartesian position `[rΦ, rΨ, rΘ]`.
    pub fn cartesian(&self) -> [f64; 3] {
        [self.r * self.cosines.big_phi, self.r * self.cosines.big_psi, self.r * self.cosines.big_theta]
    }
}

/// Uniform planar array of `m_x × m_z` elements with spacing `d` and element area `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdArray {
    m_x: usize,
    m_z: usize,
    d: f64,
    a: f64,
}

impl SpdArray {
    pub fn new(m_x: usize, m_z: usize, d: f64, a: f64) -> Result<Self> {
        odd_count("m_x", m_x)?;
        odd_count("m_z", m_z)?;
        positive("d", d)?;
        positive("element area", a)?;
        let side = a.sqrt();
        if d < side {
            return Err(GainError::SpacingBelowElementSize { spacing: d, side });
        }
        Ok(Self { m_x, m_z, d, a })
    }

    /// A linear array of `m` elements along x.
    pub fn linear(m: usize, d: f64, a: f64) -> Result<Self> {
        Self::new(m, 1, d, a)
    }

    pub fn m_x(&self) -> usize {
        self.m_x
    }

    pub fn m_z(&self) -> usize {
        self.m_z
    }

    pub fn spacing(&self) -> f64 {
        self.d
    }

    pub fn element_area(&self) -> f64 {
        self.a
    }

    pub fn element_count(&self) -> usize {
        self.m_x * self.m_z
    }

    /// Occupation ratio `μ_oc = A / d²`, in (0, 1].
    pub fn occupation_ratio(&self) -> f64 {
        self.a / (self.d * self.d)
    }

    /// Largest index along x, `(m_x − 1) / 2`.
    pub fn half_count_x(&self) -> i64 {
        (self.m_x as i64 - 1) / 2
    }

    pub fn half_count_z(&self) -> i64 {
        (self.m_z as i64 - 1) / 2
    }

    /// Physical extent along x, taken as `m_x·d`.
    pub fn length_x(&self) -> f64 {
        self.m_x as f64 * self.d
    }

    pub fn length_z(&self) -> f64 {
        self.m_z as f64 * self.d
    }

    /// The continuous aperture covering the same footprint (`L = M·d`).
    pub fn matching_aperture(&self) -> CapAperture {
        CapAperture { l_x: self.length_x(), l_z: self.length_z() }
    }
}

fn odd_count(axis: &'static str, count: usize) -> Result<usize> {
    if count % 2 == 1 {
        Ok(count)
    } else {
        Err(GainError::EvenElementCount { axis, count })
    }
}

/// Continuous rectangular aperture of size `l_x × l_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapAperture {
    l_x: f64,
    l_z: f64,
}

impl CapAperture {
    pub fn new(l_x: f64, l_z: f64) -> Result<Self> {
        positive("l_x", l_x)?;
        positive("l_z", l_z)?;
        Ok(Self { l_x, l_z })
    }

    pub fn length_x(&self) -> f64 {
        self.l_x
    }

    pub fn length_z(&self) -> f64 {
        self.l_z
    }

    pub fn area(&self) -> f64 {
        self.l_x * self.l_z
    }
}

/// Propagation medium: wavelength plus the scalar `η / (8 R_rad)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    lambda: f64,
    radiation_factor: f64,
}

impl Medium {
    pub fn new(lambda: f64, radiation_factor: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        positive("radiation_factor", radiation_factor)?;
        Ok(Self { lambda, radiation_factor })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn radiation_factor(&self) -> f64 {
        self.radiation_factor
    }

    /// Wavenumber `k0 = 2π / λ`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.lambda
    }
}

/// Everything a gain evaluation needs besides the array itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub user: UserPosition,
    pub medium: Medium,
}

impl Scenario {
    /// `k0·r`, the grouping under which the reactive terms enter the kernels.
    pub fn k0r(&self) -> f64 {
        self.medium.wavenumber() * self.user.r()
    }
}

/// Axis-aligned rectangle `[x0, x1] × [z0, z1]` in normalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub z0: f64,
    pub z1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, z0: f64, z1: f64) -> Self {
        Self { x0, x1, z0, z1 }
    }

    /// `[−hx, hx] × [−hz, hz]`.
    pub fn centered(half_x: f64, half_z: f64) -> Self {
        Self { x0: -half_x, x1: half_x, z0: -half_z, z1: half_z }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.z1 - self.z0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, x: f64, z: f64) -> bool {
        x >= self.x0 && x <= self.x1 && z >= self.z0 && z <= self.z1
    }
}

/// Normalized integration region of an SPD array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdRegion {
    pub rect: Rect,
    /// `ε = d / r`
    pub epsilon: f64,
    /// Set when `ε > 0.1`; the midpoint sum no longer tracks the integral closely.
    pub coarse: bool,
}

/// Threshold on `ε` above which [`SpdRegion::coarse`] is raised.
pub const COARSE_EPSILON: f64 = 0.1;

/// The rectangle `[−M_xε/2, M_xε/2] × [−M_zε/2, M_zε/2]`.
pub fn spd_region(array: &SpdArray, user: &UserPosition) -> SpdRegion {
    let epsilon = array.spacing() / user.r();
    let rect = Rect::centered(0.5 * array.m_x() as f64 * epsilon, 0.5 * array.m_z() as f64 * epsilon);
    SpdRegion { rect, epsilon, coarse: epsilon > COARSE_EPSILON }
}

/// The rectangle `[−L_x/2r, L_x/2r] × [−L_z/2r, L_z/2r]`.
pub fn cap_region(aperture: &CapAperture, user: &UserPosition) -> Rect {
    Rect::centered(0.5 * aperture.length_x() / user.r(), 0.5 * aperture.length_z() / user.r())
}

/// Distance from the user to the center of element `(m_x_idx, m_z_idx)`.
pub fn element_distance(user: &UserPosition, m_x_idx: i64, m_z_idx: i64, d: f64) -> f64 {
    let c = user.cosines();
    let eps = d / user.r();
    let dx = m_x_idx as f64 * eps - c.big_phi;
    let dz = m_z_idx as f64 * eps - c.big_theta;
    user.r() * (dx * dx + c.big_psi * c.big_psi + dz * dz).sqrt()
}

/// Distance from the user to the nearest element center of `array`.
pub fn closest_element_distance(array: &SpdArray, user: &UserPosition) -> f64 {
    let c = user.cosines();
    let eps = array.spacing() / user.r();
    let nearest = |proj: f64, half: i64| ((proj / eps).round() as i64).clamp(-half, half);
    let mx = nearest(c.big_phi, array.half_count_x());
    let mz = nearest(c.big_theta, array.half_count_z());
    element_distance(user, mx, mz, array.spacing())
}
