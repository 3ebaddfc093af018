use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::error::{GainError, Result};
use crate::geometry::{CapAperture, Medium, SpdArray, UserPosition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrayKind {
    /// Planar discrete array.
    SpdUpa,
    /// Linear discrete array along x.
    SpdUla,
    /// Continuous aperture.
    Cap,
}

impl fmt::Display for ArrayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArrayKind::SpdUpa => "spd_upa",
            ArrayKind::SpdUla => "spd_ula",
            ArrayKind::Cap => "cap",
        })
    }
}

/// Scenario parameters as stored in a flat JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub d: f64,
    pub lambda: f64,
    pub element_area: f64,
    pub radiation_factor: f64,
    pub array_kind: ArrayKind,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::defaults()
    }
}

impl ScenarioConfig {
    /// r = 5 m, θ = π/6, φ = π/3, d = 0.0628 m, λ = 2d, A = λ²/4π, unit
    /// radiation factor, planar discrete array.
    pub fn defaults() -> Self {
        let d = 0.0628;
        let lambda = 2.0 * d;
        ScenarioConfig {
            r: 5.0,
            theta: PI / 6.0,
            phi: PI / 3.0,
            d,
            lambda,
            element_area: lambda * lambda / (4.0 * PI),
            radiation_factor: 1.0,
            array_kind: ArrayKind::SpdUpa,
        }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, ExperimentError> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> std::result::Result<Self, ExperimentError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }

    /// Builds every geometry type the config implies, surfacing the first
    /// violated invariant.
    pub fn validate(&self) -> Result<()> {
        self.user()?;
        self.medium()?;
        // a 1×1 array checks d, A and d ≥ √A
        SpdArray::new(1, 1, self.d, self.element_area)?;
        Ok(())
    }

    pub fn user(&self) -> Result<UserPosition> {
        UserPosition::new(self.r, self.theta, self.phi)
    }

    pub fn medium(&self) -> Result<Medium> {
        Medium::new(self.lambda, self.radiation_factor)
    }

    /// `A / d²`.
    pub fn occupation_ratio(&self) -> f64 {
        self.element_area / (self.d * self.d)
    }

    /// The geometry of the configured kind. Discrete arrays use `m_x × m_z`
    /// elements (`m_z` is forced to 1 for a linear array); a continuous
    /// aperture uses `l_x × l_z`, defaulting to the footprint `m·d` of the
    /// matching discrete array.
    pub fn geometry(&self, size: ArraySize) -> Result<ArrayGeometry> {
        match self.array_kind {
            ArrayKind::SpdUpa => Ok(ArrayGeometry::Spd(SpdArray::new(size.m_x, size.m_z, self.d, self.element_area)?)),
            ArrayKind::SpdUla => Ok(ArrayGeometry::Spd(SpdArray::linear(size.m_x, self.d, self.element_area)?)),
            ArrayKind::Cap => {
                let l_x = size.l_x.unwrap_or(size.m_x as f64 * self.d);
                let l_z = size.l_z.unwrap_or(size.m_z as f64 * self.d);
                Ok(ArrayGeometry::Cap(CapAperture::new(l_x, l_z)?))
            }
        }
    }

    pub fn with_distance(&self, r: f64) -> std::result::Result<Self, GainError> {
        let cfg = ScenarioConfig { r, ..self.clone() };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Size parameters given on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArraySize {
    pub m_x: usize,
    pub m_z: usize,
    pub l_x: Option<f64>,
    pub l_z: Option<f64>,
}

impl ArraySize {
    pub fn square(m: usize) -> Self {
        ArraySize { m_x: m, m_z: m, l_x: None, l_z: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArrayGeometry {
    Spd(SpdArray),
    Cap(CapAperture),
}
