//! Scenario configuration, parameter sweeps with CSV output, and the
//! verification suite behind the command-line tool.

mod config;
mod sweep;
mod verify;

use std::f64::consts::PI;

use thiserror::Error;

use crate::closed_forms::{cap_asymptotic, ula_asymptotic, upa_asymptotic};
use crate::discrete::gain_breakdown;
use crate::error::GainError;
use crate::geometry::{CapAperture, Medium, UserPosition};
use crate::integral::cap_gain_pair;
use crate::quadrature::QuadratureSpec;

pub use config::{ArrayGeometry, ArrayKind, ArraySize, ScenarioConfig};
pub use sweep::{
    aperture_sweep, elements_sweep, log_odd_counts, log_space, ratio_sweep, read_csv, validate_csv, write_csv, Sweep,
    SweepRecord, CSV_HEADER,
};
pub use verify::{run_verify, CheckResult, Perturbation, VerifyOptions, VerifyReport};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Gain(#[from] GainError),

    #[error("invalid config file: {0}")]
    Json(#[from] serde_json::Error),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("csv error: {0}")]
    Csv(String),

    #[error("invalid sweep: {0}")]
    Sweep(String),
}

impl From<csv::Error> for ExperimentError {
    fn from(e: csv::Error) -> Self {
        ExperimentError::Csv(e.to_string())
    }
}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Io(e.to_string())
    }
}

/// All quantities reported for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub gain_eva: f64,
    pub gain_rad: f64,
    pub gain_far: f64,
    pub limit_eva: f64,
    pub limit_rad: f64,
    /// False if a quadrature ran out of panels.
    pub converged: bool,
}

impl Evaluation {
    pub fn ratio_db(&self) -> f64 {
        10.0 * (self.gain_eva / self.gain_rad).log10()
    }
}

/// Far-field gain of a continuous aperture, `η/(8R_rad) · Ψ L_x L_z / (4πr²)`.
pub fn cap_far_field_gain(aperture: &CapAperture, user: &UserPosition, medium: &Medium) -> f64 {
    let r = user.r();
    medium.radiation_factor() * user.cosines().big_psi * aperture.area() / (4.0 * PI * r * r)
}

/// Gains and large-aperture limits of one array. Discrete arrays are summed
/// element by element; apertures are integrated.
pub fn evaluate(
    cfg: &ScenarioConfig,
    geometry: &ArrayGeometry,
    spec: &QuadratureSpec,
) -> Result<Evaluation, ExperimentError> {
    let user = cfg.user()?;
    let medium = cfg.medium()?;
    match geometry {
        ArrayGeometry::Spd(array) => {
            let g = gain_breakdown(array, &user, &medium)?;
            let (limit_eva, limit_rad) = if array.m_z() == 1 && cfg.array_kind == ArrayKind::SpdUla {
                (
                    ula_asymptotic(&user, &medium, cfg.d, cfg.element_area, true)?.value,
                    ula_asymptotic(&user, &medium, cfg.d, cfg.element_area, false)?.value,
                )
            } else {
                let mu = array.occupation_ratio();
                (upa_asymptotic(&user, &medium, mu, true)?.value, upa_asymptotic(&user, &medium, mu, false)?.value)
            };
            Ok(Evaluation {
                gain_eva: g.with_reactive,
                gain_rad: g.radiating_only,
                gain_far: g.far_field,
                limit_eva,
                limit_rad,
                converged: true,
            })
        }
        ArrayGeometry::Cap(aperture) => {
            let (eva, rad) = cap_gain_pair(aperture, &user, &medium, spec)?;
            Ok(Evaluation {
                gain_eva: eva.value,
                gain_rad: rad.value,
                gain_far: cap_far_field_gain(aperture, &user, &medium),
                limit_eva: cap_asymptotic(&user, &medium, true).value,
                limit_rad: cap_asymptotic(&user, &medium, false).value,
                converged: eva.converged,
            })
        }
    }
}
