use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ArrayGeometry, ArrayKind, ArraySize, ScenarioConfig};
use super::{cap_far_field_gain, evaluate, Evaluation, ExperimentError};
use crate::closed_forms::cap_asymptotic;
use crate::geometry::CapAperture;
use crate::integral::cap_gain_pair;
use crate::quadrature::QuadratureSpec;

pub const CSV_HEADER: [&str; 8] =
    ["var_name", "var_value", "gain_eva", "gain_rad", "gain_far", "limit_eva", "limit_rad", "ratio_db"];

/// One row of sweep output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub var_name: String,
    pub var_value: f64,
    pub gain_eva: f64,
    pub gain_rad: f64,
    pub gain_far: f64,
    pub limit_eva: f64,
    pub limit_rad: f64,
    /// `10·log10(gain_eva / gain_rad)`.
    pub ratio_db: f64,
}

impl SweepRecord {
    fn new(var_name: impl Into<String>, var_value: f64, e: &Evaluation) -> Self {
        SweepRecord {
            var_name: var_name.into(),
            var_value,
            gain_eva: e.gain_eva,
            gain_rad: e.gain_rad,
            gain_far: e.gain_far,
            limit_eva: e.limit_eva,
            limit_rad: e.limit_rad,
            ratio_db: e.ratio_db(),
        }
    }

    fn check(&self) -> Result<(), String> {
        let values = [self.var_value, self.gain_eva, self.gain_rad, self.gain_far, self.limit_eva, self.limit_rad];
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(format!("negative or non-finite value in {self:?}"));
        }
        let expect = 10.0 * (self.gain_eva / self.gain_rad).log10();
        if !self.ratio_db.is_finite() || (self.ratio_db - expect).abs() > 1e-12 * expect.abs().max(1.0) {
            return Err(format!("ratio_db {} does not match gains ({expect})", self.ratio_db));
        }
        Ok(())
    }
}

/// Rows of a sweep, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub records: Vec<SweepRecord>,
    /// False if any quadrature in the sweep ran out of panels.
    pub converged: bool,
}

impl FromIterator<(SweepRecord, bool)> for Sweep {
    fn from_iter<I: IntoIterator<Item = (SweepRecord, bool)>>(iter: I) -> Self {
        let mut sweep = Sweep { records: Vec::new(), converged: true };
        for (rec, ok) in iter {
            sweep.records.push(rec);
            sweep.converged &= ok;
        }
        sweep
    }
}

/// `steps` points from `lo` to `hi`, equally spaced in log scale, endpoints exact.
pub fn log_space(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, ExperimentError> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || steps == 0 {
        return Err(ExperimentError::Sweep(format!(
            "log range needs 0 < from <= to and steps >= 1, got {lo}..{hi} in {steps}"
        )));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| match i {
            0 => lo,
            i if i == steps - 1 => hi,
            i => (a + (b - a) * i as f64 / last).exp(),
        })
        .collect())
}

fn nearest_odd(x: f64) -> usize {
    let k = ((x - 1.0) / 2.0).round().max(0.0);
    2 * k as usize + 1
}

/// Log-spaced odd element counts in `[lo, hi]`, duplicates removed.
pub fn log_odd_counts(lo: usize, hi: usize, steps: usize) -> Result<Vec<usize>, ExperimentError> {
    let lo_odd = lo.max(1) | 1;
    let hi_odd = if hi % 2 == 1 { hi } else { hi.saturating_sub(1) };
    if hi_odd < lo_odd {
        return Err(ExperimentError::Sweep(format!("no odd count in {lo}..={hi}")));
    }
    let mut counts: Vec<usize> = log_space(lo_odd as f64, hi_odd as f64, steps)?
        .into_iter()
        .map(|v| nearest_odd(v).clamp(lo_odd, hi_odd))
        .collect();
    counts.dedup();
    Ok(counts)
}

fn collect_rows(rows: Vec<Result<(SweepRecord, bool), ExperimentError>>) -> Result<Sweep, ExperimentError> {
    rows.into_iter().collect::<Result<Sweep, _>>()
}

/// Square arrays with `m` elements per side (`m × 1` for a linear array).
/// `var_value` is the total element count; a continuous aperture is sized to
/// the matching footprint `m·d` and reports `m²`.
pub fn elements_sweep(
    cfg: &ScenarioConfig,
    per_side: &[usize],
    spec: &QuadratureSpec,
) -> Result<Sweep, ExperimentError> {
    cfg.validate()?;
    let rows = per_side
        .par_iter()
        .map(|&m| {
            let geometry = cfg.geometry(ArraySize::square(m))?;
            let count = match &geometry {
                ArrayGeometry::Spd(a) => a.element_count(),
                ArrayGeometry::Cap(_) => m * m,
            };
            let e = evaluate(cfg, &geometry, spec)?;
            Ok((SweepRecord::new("elements", count as f64, &e), e.converged))
        })
        .collect();
    collect_rows(rows)
}

/// Square apertures of the given areas (m²). A discrete array takes the
/// nearest odd count `L/d` per side and reports its actual footprint
/// `(m·d)²`; repeated counts are dropped.
pub fn aperture_sweep(cfg: &ScenarioConfig, areas: &[f64], spec: &QuadratureSpec) -> Result<Sweep, ExperimentError> {
    cfg.validate()?;
    if cfg.array_kind == ArrayKind::SpdUla {
        return Err(ExperimentError::Sweep("aperture sweeps need a planar array (spd_upa or cap)".into()));
    }
    let mut sizes: Vec<(ArraySize, f64)> = Vec::with_capacity(areas.len());
    for &area in areas {
        if !(area > 0.0 && area.is_finite()) {
            return Err(ExperimentError::Sweep(format!("aperture area must be positive, got {area}")));
        }
        let side = area.sqrt();
        let entry = match cfg.array_kind {
            ArrayKind::Cap => (ArraySize { m_x: 1, m_z: 1, l_x: Some(side), l_z: Some(side) }, area),
            _ => {
                let m = nearest_odd(side / cfg.d);
                let footprint = m as f64 * cfg.d;
                (ArraySize::square(m), footprint * footprint)
            }
        };
        if sizes.last().is_none_or(|last| last.0 != entry.0) {
            sizes.push(entry);
        }
    }
    let rows = sizes
        .par_iter()
        .map(|&(size, value)| {
            let e = evaluate(cfg, &cfg.geometry(size)?, spec)?;
            Ok((SweepRecord::new("aperture", value, &e), e.converged))
        })
        .collect();
    collect_rows(rows)
}

/// Reactive-over-radiating gain ratio of square apertures (areas in m²) at
/// each distance. Gains are integral forms: a continuous aperture directly,
/// a planar discrete array as `μ_oc` times the aperture value. Rows are named
/// `aperture@r=<r>`, grouped by distance.
pub fn ratio_sweep(
    cfg: &ScenarioConfig,
    areas: &[f64],
    distances: &[f64],
    spec: &QuadratureSpec,
) -> Result<Sweep, ExperimentError> {
    cfg.validate()?;
    let scale = match cfg.array_kind {
        ArrayKind::Cap => 1.0,
        ArrayKind::SpdUpa => cfg.occupation_ratio(),
        ArrayKind::SpdUla => {
            return Err(ExperimentError::Sweep("ratio sweeps need a planar array (spd_upa or cap)".into()))
        }
    };
    let mut points = Vec::with_capacity(areas.len() * distances.len());
    for &r in distances {
        let at_r = cfg.with_distance(r)?;
        for &area in areas {
            let side = area.sqrt();
            points.push((at_r.clone(), area, CapAperture::new(side, side)?));
        }
    }
    let rows = points
        .par_iter()
        .map(|(c, area, aperture)| {
            let user = c.user()?;
            let medium = c.medium()?;
            let (eva, rad) = cap_gain_pair(aperture, &user, &medium, spec)?;
            let e = Evaluation {
                gain_eva: scale * eva.value,
                gain_rad: scale * rad.value,
                gain_far: scale * cap_far_field_gain(aperture, &user, &medium),
                limit_eva: scale * cap_asymptotic(&user, &medium, true).value,
                limit_rad: scale * cap_asymptotic(&user, &medium, false).value,
                converged: eva.converged,
            };
            Ok((SweepRecord::new(format!("aperture@r={}", c.r), *area, &e), e.converged))
        })
        .collect();
    collect_rows(rows)
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the header and one line per record; numbers carry 17 significant
/// digits, lines end in `\n`.
pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.var_name.clone(),
            fmt_num(r.var_value),
            fmt_num(r.gain_eva),
            fmt_num(r.gain_rad),
            fmt_num(r.gain_far),
            fmt_num(r.limit_eva),
            fmt_num(r.limit_rad),
            fmt_num(r.ratio_db),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(text: &str) -> Result<Vec<SweepRecord>, ExperimentError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(ExperimentError::Csv(format!("unexpected header {header:?}")));
    }
    rdr.deserialize().map(|r| r.map_err(ExperimentError::from)).collect()
}

/// Re-parses emitted CSV and checks every row: non-negative finite gains
/// and a `ratio_db` consistent with the gains. Returns the row count.
pub fn validate_csv(text: &str) -> Result<usize, ExperimentError> {
    if text.contains('\r') {
        return Err(ExperimentError::Csv("carriage return in output".into()));
    }
    if !text.starts_with(&(CSV_HEADER.join(",") + "\n")) {
        return Err(ExperimentError::Csv("header row missing".into()));
    }
    let records = read_csv(text)?;
    for (i, r) in records.iter().enumerate() {
        r.check().map_err(|e| ExperimentError::Csv(format!("row {}: {e}", i + 1)))?;
    }
    Ok(records.len())
}
