use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nearfield_gain::closed_forms::{
    cap_asymptotic, ratio_spd, ratio_spd_threshold, ula_asymptotic, ula_ratio, upa_asymptotic,
};
use nearfield_gain::experiments::{
    aperture_sweep, elements_sweep, evaluate, log_odd_counts, log_space, ratio_sweep, run_verify, validate_csv,
    write_csv, ArrayGeometry, ArrayKind, ArraySize, ExperimentError, Perturbation, ScenarioConfig, Sweep, SweepRecord,
    VerifyOptions,
};
use nearfield_gain::{GainError, KernelOrder, QuadratureSpec};
use thiserror::Error;

#[derive(Parser, Debug)]
#[command(name = "nfgain", version, about = "Near-field channel gain of antenna arrays")]
struct Cli {
    /// Print the default scenario as JSON and exit.
    #[arg(long)]
    defaults: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gain of a single array, with limits.
    Gain {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        size: SizeArgs,
        /// Report the gain without the reactive field terms.
        #[arg(long)]
        no_reactive: bool,
        /// Also write the result as a one-row CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gain versus element count or aperture area, as CSV.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = SweepVar::Elements)]
        var: SweepVar,
        /// Start of the range: elements per side, or aperture area in m².
        #[arg(long)]
        from: Option<f64>,
        /// End of the range.
        #[arg(long)]
        to: Option<f64>,
        /// Number of log-spaced points.
        #[arg(long, default_value_t = 24)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reactive/radiating gain ratio versus aperture area at several distances, as CSV.
    Ratio {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Smallest aperture area in m².
        #[arg(long, default_value_t = 1e-3)]
        from: f64,
        /// Largest aperture area in m².
        #[arg(long, default_value_t = 1e2)]
        to: f64,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        /// Distances in m, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 5.0, 25.0])]
        distances: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Large-aperture limits and ratios for the scenario.
    Limits {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        no_reactive: bool,
    },
    /// Run the self-check suite.
    Verify {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Scale kernel order 3, 5 or 7 in the integral implementation (fault injection).
        #[arg(long)]
        perturb_order: Option<u32>,
        #[arg(long, default_value_t = 1.0 + 1e-3)]
        perturb_factor: f64,
        /// Write the machine-readable summary here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ArrayArg {
    SpdUpa,
    SpdUla,
    Cap,
}

impl From<ArrayArg> for ArrayKind {
    fn from(a: ArrayArg) -> Self {
        match a {
            ArrayArg::SpdUpa => ArrayKind::SpdUpa,
            ArrayArg::SpdUla => ArrayKind::SpdUla,
            ArrayArg::Cap => ArrayKind::Cap,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SweepVar {
    Elements,
    Aperture,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// JSON scenario file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    array: Option<ArrayArg>,
    /// Distance to the array center in m.
    #[arg(long)]
    r: Option<f64>,
    /// Polar angle in rad.
    #[arg(long)]
    theta: Option<f64>,
    /// Azimuth in rad.
    #[arg(long)]
    phi: Option<f64>,
    /// Element spacing in m.
    #[arg(long)]
    d: Option<f64>,
    /// Wavelength in m.
    #[arg(long)]
    lambda: Option<f64>,
    /// Element area in m².
    #[arg(long)]
    area: Option<f64>,
    /// Radiation factor η/(8 R_rad).
    #[arg(long)]
    factor: Option<f64>,
    /// Relative tolerance for quadrature.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct SizeArgs {
    #[arg(long, default_value_t = 25)]
    mx: usize,
    #[arg(long, default_value_t = 25)]
    mz: usize,
    /// Aperture length along x in m (continuous aperture; default mx·d).
    #[arg(long)]
    lx: Option<f64>,
    /// Aperture length along z in m (default mz·d).
    #[arg(long)]
    lz: Option<f64>,
}

#[derive(Debug, Error)]
enum Failure {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Verification(String),
    #[error("{0}")]
    Unconverged(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Verification(_) => 2,
            Failure::Unconverged(_) => 3,
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<GainError> for Failure {
    fn from(e: GainError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<ScenarioConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::defaults(),
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut cfg.r, self.r);
        set(&mut cfg.theta, self.theta);
        set(&mut cfg.phi, self.phi);
        set(&mut cfg.d, self.d);
        set(&mut cfg.lambda, self.lambda);
        set(&mut cfg.element_area, self.area);
        set(&mut cfg.radiation_factor, self.factor);
        if let Some(a) = self.array {
            cfg.array_kind = a.into();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn spec(&self) -> Result<QuadratureSpec, Failure> {
        Ok(match self.tol {
            Some(t) => QuadratureSpec::with_tolerance(t)?,
            None => QuadratureSpec::default(),
        })
    }
}

fn csv_text(records: &[SweepRecord]) -> Result<String, Failure> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    let text = String::from_utf8(buf).expect("csv output is ascii");
    validate_csv(&text).map_err(|e| Failure::Verification(format!("emitted csv failed validation: {e}")))?;
    Ok(text)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display()))),
        None => print_text(text),
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_text(text: &str) -> Result<(), Failure> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn finish_sweep(sweep: Sweep, out: Option<&PathBuf>) -> Result<(), Failure> {
    emit(&csv_text(&sweep.records)?, out)?;
    if sweep.converged {
        Ok(())
    } else {
        Err(Failure::Unconverged("quadrature panel budget exhausted for some rows; raise --tol".into()))
    }
}

fn format_rows(rows: &[(&str, f64)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<width$}  {v:.10e}\n")).collect()
}

fn cmd_gain(scenario: &ScenarioArgs, size: &SizeArgs, no_reactive: bool, out: Option<&PathBuf>) -> Result<(), Failure> {
    let cfg = scenario.resolve()?;
    let geometry = cfg.geometry(ArraySize { m_x: size.mx, m_z: size.mz, l_x: size.lx, l_z: size.lz })?;
    let e = evaluate(&cfg, &geometry, &scenario.spec()?)?;
    let label = match &geometry {
        ArrayGeometry::Spd(a) => format!("{} with {} x {} elements", cfg.array_kind, a.m_x(), a.m_z()),
        ArrayGeometry::Cap(c) => format!("cap of {:.6} m x {:.6} m", c.length_x(), c.length_z()),
    };
    let mut text = format!("{label} at r = {} m\n", cfg.r);
    let mut rows = Vec::new();
    if no_reactive {
        rows.push(("gain (radiating only)", e.gain_rad));
        rows.push(("far-field gain", e.gain_far));
        rows.push(("limit (radiating only)", e.limit_rad));
    } else {
        rows.extend([
            ("gain (with reactive)", e.gain_eva),
            ("gain (radiating only)", e.gain_rad),
            ("far-field gain", e.gain_far),
            ("limit (with reactive)", e.limit_eva),
            ("limit (radiating only)", e.limit_rad),
        ]);
    }
    rows.push(("ratio (dB)", e.ratio_db()));
    text += &format_rows(&rows);
    print_text(&text)?;
    if let Some(path) = out {
        let var_value = match &geometry {
            ArrayGeometry::Spd(a) => a.element_count() as f64,
            ArrayGeometry::Cap(c) => c.area(),
        };
        let record = SweepRecord {
            var_name: "single".into(),
            var_value,
            gain_eva: e.gain_eva,
            gain_rad: e.gain_rad,
            gain_far: e.gain_far,
            limit_eva: e.limit_eva,
            limit_rad: e.limit_rad,
            ratio_db: e.ratio_db(),
        };
        emit(&csv_text(&[record])?, Some(path))?;
    }
    if e.converged {
        Ok(())
    } else {
        Err(Failure::Unconverged("quadrature did not reach the requested tolerance".into()))
    }
}

fn cmd_sweep(
    scenario: &ScenarioArgs,
    var: SweepVar,
    from: Option<f64>,
    to: Option<f64>,
    steps: usize,
    out: Option<&PathBuf>,
) -> Result<(), Failure> {
    let cfg = scenario.resolve()?;
    let spec = scenario.spec()?;
    let sweep = match var {
        SweepVar::Elements => {
            let lo = from.unwrap_or(5.0);
            let hi = to.unwrap_or(2001.0);
            if !(lo >= 1.0 && hi >= lo && hi <= 1e6) {
                return Err(Failure::Validation(format!(
                    "element range {lo}..{hi} must satisfy 1 <= from <= to <= 1e6"
                )));
            }
            let counts = log_odd_counts(lo.round() as usize, hi.round() as usize, steps)?;
            elements_sweep(&cfg, &counts, &spec)?
        }
        SweepVar::Aperture => {
            let areas = log_space(from.unwrap_or(1e-2), to.unwrap_or(1e2), steps)?;
            aperture_sweep(&cfg, &areas, &spec)?
        }
    };
    finish_sweep(sweep, out)
}

fn cmd_limits(scenario: &ScenarioArgs, no_reactive: bool) -> Result<(), Failure> {
    let cfg = scenario.resolve()?;
    let user = cfg.user()?;
    let medium = cfg.medium()?;
    let mu = cfg.occupation_ratio();
    let mut rows = vec![
        ("occupation ratio", mu),
        ("planar limit (radiating only)", upa_asymptotic(&user, &medium, mu, false)?.value),
        ("aperture limit (radiating only)", cap_asymptotic(&user, &medium, false).value),
        ("linear limit (radiating only)", ula_asymptotic(&user, &medium, cfg.d, cfg.element_area, false)?.value),
    ];
    if !no_reactive {
        rows.extend([
            ("planar limit (with reactive)", upa_asymptotic(&user, &medium, mu, true)?.value),
            ("aperture limit (with reactive)", cap_asymptotic(&user, &medium, true).value),
            ("linear limit (with reactive)", ula_asymptotic(&user, &medium, cfg.d, cfg.element_area, true)?.value),
            ("planar ratio", ratio_spd(&user, &medium)),
            ("linear ratio", ula_ratio(&user, &medium)?),
            ("ratio threshold r*psi (m)", ratio_spd_threshold(cfg.lambda)),
        ]);
    }
    print_text(&format_rows(&rows))
}

fn cmd_verify(scenario: &ScenarioArgs, order: Option<u32>, factor: f64, json: Option<&PathBuf>) -> Result<(), Failure> {
    let cfg = scenario.resolve()?;
    let perturbation = match order {
        Some(n) => Some(Perturbation { order: KernelOrder::try_from(n)?, factor }),
        None => None,
    };
    let mut opts = VerifyOptions { perturbation, ..Default::default() };
    if let Some(t) = scenario.tol {
        QuadratureSpec::with_tolerance(t)?;
        opts.rel_tol = t;
    }
    let start = Instant::now();
    let report = run_verify(&cfg, &opts)?;
    print_text(&format!("{report}\nelapsed {:.2} s\n", start.elapsed().as_secs_f64()))?;
    if let Some(path) = json {
        fs::write(path, report.to_json() + "\n")
            .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    }
    if report.passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(Failure::Verification(format!("failed checks: {}", names.join(", "))))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.defaults {
        return print_text(&(ScenarioConfig::defaults().to_json() + "\n"));
    }
    let Some(command) = cli.command else {
        return Err(Failure::Validation("no subcommand given; see --help".into()));
    };
    match &command {
        Command::Gain { scenario, size, no_reactive, out } => cmd_gain(scenario, size, *no_reactive, out.as_ref()),
        Command::Sweep { scenario, var, from, to, steps, out } => {
            cmd_sweep(scenario, *var, *from, *to, *steps, out.as_ref())
        }
        Command::Ratio { scenario, from, to, steps, distances, out } => {
            let cfg = scenario.resolve()?;
            let areas = log_space(*from, *to, *steps)?;
            let sweep = ratio_sweep(&cfg, &areas, distances, &scenario.spec()?)?;
            finish_sweep(sweep, out.as_ref())
        }
        Command::Limits { scenario, no_reactive } => cmd_limits(scenario, *no_reactive),
        Command::Verify { scenario, perturb_order, perturb_factor, json } => {
            cmd_verify(scenario, *perturb_order, *perturb_factor, json.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
