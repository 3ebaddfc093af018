//! Self-check suite: closed-form anchors, disk sandwich bounds, limit
//! recombination, and the agreement chains sum ↔ integral ↔ closed form.
//!
//! A [`Perturbation`] scales one kernel moment inside the integral-form
//! implementation only, so the suite can demonstrate that it notices.

use std::fmt;

use rand::{rngs::StdRng, Rng, SeedableRng};
use serde::Serialize;

use super::config::ScenarioConfig;
use super::ExperimentError;
use crate::closed_forms::{
    cap_asymptotic, ratio_spd_excess, ratio_spd_from_perpendicular, ratio_spd_threshold, ula_asymptotic,
    ula_gain_closed, ula_ratio, upa_asymptotic,
};
use crate::discrete::{fold_moments, kernel_params, spd_gain_sum, spd_prefactor};
use crate::geometry::{spd_region, DirectionCosines, Medium, Rect, SpdArray, UserPosition};
use crate::integral::{cap_prefactor, moment_integral_mapped, ula_gain_1d, MomentIntegral};
use crate::kernels::{green_magnitude_sq, KernelOrder};
use crate::oracle::{
    disk_bounds, kernel_rect_integral, recombined_planar_limit, sandwich_rect, SandwichWitness, STRICT_MARGIN,
};
use crate::quadrature::QuadratureSpec;

const PSI_GRID: [f64; 3] = [0.1, 0.433, 0.9];
const HALF_WIDTHS: [f64; 4] = [1.0, 4.0, 16.0, 64.0];

/// Multiplies one kernel order by `factor` in the integral-form implementation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perturbation {
    pub order: KernelOrder,
    pub factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Relative tolerance for every quadrature in the suite.
    pub rel_tol: f64,
    pub perturbation: Option<Perturbation>,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { rel_tol: 1e-11, perturbation: None, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed error (or, for bound checks, worst normalized slack).
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub perturbation: Option<Perturbation>,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            writeln!(
                f,
                "{} {:width$}  measured={:<10.3e} tol={:<9.1e} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.tolerance,
                c.detail,
            )?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

fn check(name: impl Into<String>, measured: f64, tolerance: f64, detail: impl Into<String>) -> CheckResult {
    CheckResult { name: name.into(), passed: measured <= tolerance, measured, tolerance, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Cosines with the given Ψ and Φ = Θ.
fn cosines_with_psi(psi: f64) -> DirectionCosines {
    let s = ((1.0 - psi * psi) / 2.0).sqrt();
    DirectionCosines::from_components(s, psi, s).expect("unit norm by construction")
}

struct Ctx {
    spec: QuadratureSpec,
    perturbation: Option<Perturbation>,
}

impl Ctx {
    fn moments(&self, rect: Rect, c: &DirectionCosines) -> MomentIntegral {
        let p = self.perturbation;
        moment_integral_mapped(rect, c, &self.spec, move |mut m| {
            if let Some(p) = p {
                m[p.order.index()] *= p.factor;
            }
            m
        })
    }

    fn spd_integral(&self, array: &SpdArray, user: &UserPosition, medium: &Medium) -> Result<f64, ExperimentError> {
        let m = self.moments(spd_region(array, user).rect, &user.cosines());
        let w = kernel_params(user, medium)?.moment_weights();
        Ok(spd_prefactor(array, user, medium) * fold_moments(&m.moments, &w, true))
    }
}

/// Runs the suite at the given scenario (normally the defaults).
pub fn run_verify(cfg: &ScenarioConfig, opts: &VerifyOptions) -> Result<VerifyReport, ExperimentError> {
    let ctx = Ctx { spec: QuadratureSpec::with_tolerance(opts.rel_tol)?, perturbation: opts.perturbation };
    let user = cfg.user()?;
    let medium = cfg.medium()?;
    let mut checks = Vec::new();

    anchors(&user, &medium, &mut checks)?;
    kernel_identity(opts.seed, &mut checks);
    for n in KernelOrder::ALL {
        oracle_sandwich(n, &ctx.spec, &mut checks);
    }
    for n in KernelOrder::ALL {
        implementation_sandwich(n, &ctx, &mut checks);
        shift_identity(n, &user, &ctx, &mut checks);
    }
    recombination(opts.seed, &mut checks)?;
    chains(cfg, &user, &medium, &ctx, &mut checks)?;
    Ok(VerifyReport { perturbation: opts.perturbation, checks })
}

fn anchors(user: &UserPosition, medium: &Medium, out: &mut Vec<CheckResult>) -> Result<(), ExperimentError> {
    let lambda = medium.lambda();
    let v = ratio_spd_from_perpendicular(lambda, lambda);
    out.push(check("ratio_spd_anchor", (v - 0.99168).abs(), 1e-4, format!("ratio at r*psi = lambda: {v:.6}")));

    let a = user.cosines().a_phi_sq().sqrt();
    let at_lambda = UserPosition::from_cosines(lambda / a, user.cosines())?;
    let v = ula_ratio(&at_lambda, medium)?;
    out.push(check("ula_ratio_anchor", (v - 0.98346).abs(), 1e-4, format!("ratio at r*a = lambda: {v:.6}")));

    // excess > 0 below the threshold, < 0 above
    let (mut lo, mut hi) = (lambda / 100.0, lambda);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio_spd_excess(mid, lambda) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    let root = 0.5 * (lo + hi);
    let t = ratio_spd_threshold(lambda);
    out.push(check("threshold_bisection", rel(root, t), 1e-9, format!("root {root:.12e}, closed form {t:.12e}")));
    Ok(())
}

fn kernel_identity(seed: u64, out: &mut Vec<CheckResult>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let worst = (0..1000)
        .map(|_| {
            let u: f64 = rng.gen_range(0.0..4.0);
            // |(1 − u²) + j u|²
            let modulus = (1.0 - u * u).hypot(u);
            rel(green_magnitude_sq(u), modulus * modulus)
        })
        .fold(0.0, f64::max);
    out.push(check("kernel_identity", worst, 1e-13, "1000 random u in [0, 4)"));
}

fn oracle_sandwich(n: KernelOrder, spec: &QuadratureSpec, out: &mut Vec<CheckResult>) {
    let mut failures = Vec::new();
    let mut worst_gap_ratio: f64 = 0.0;
    let mut monotone = true;
    for psi in PSI_GRID {
        let mut prev: Option<SandwichWitness> = None;
        for h in HALF_WIDTHS {
            match sandwich_rect(h, h, n, psi, spec) {
                Ok(w) => {
                    // distance to the limit is bounded by the inscribed-disk tail
                    worst_gap_ratio = worst_gap_ratio.max(w.outside / w.tail_upper);
                    if let Some(p) = prev {
                        monotone &= w.centered > p.centered && w.outside < p.outside;
                    }
                    prev = Some(w);
                }
                Err(e) => failures.push(e.to_string()),
            }
        }
    }
    let cases = PSI_GRID.len() * HALF_WIDTHS.len();
    let detail =
        if failures.is_empty() { format!("{cases} squares, tail form and direct form") } else { failures.join("; ") };
    out.push(CheckResult {
        name: format!("sandwich_oracle[n={}]", n.n()),
        passed: failures.is_empty(),
        measured: failures.len() as f64,
        tolerance: 0.0,
        detail,
    });
    out.push(CheckResult {
        name: format!("limit_convergence[n={}]", n.n()),
        passed: monotone && worst_gap_ratio < 1.0,
        measured: worst_gap_ratio,
        tolerance: 1.0,
        detail: format!("monotone in half-width: {monotone}; limit gap / inscribed tail at most {worst_gap_ratio:.4}"),
    });
}

fn implementation_sandwich(n: KernelOrder, ctx: &Ctx, out: &mut Vec<CheckResult>) {
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut where_ = String::new();
    for psi in PSI_GRID {
        let c = cosines_with_psi(psi);
        for h in HALF_WIDTHS {
            let m = ctx.moments(Rect::new(c.big_phi - h, c.big_phi + h, c.big_theta - h, c.big_theta + h), &c);
            let b = disk_bounds(h, h, n, psi);
            let value = m.moments[n.index()];
            let margin = STRICT_MARGIN * b.upper + m.abs_error[n.index()];
            // > 0 when outside [lower, upper] by more than the margin
            let excess = ((b.lower - value).max(value - b.upper) - margin) / b.upper;
            if excess > worst {
                worst = excess;
                where_ = format!("worst at psi={psi}, h={h}");
            }
        }
    }
    out.push(check(format!("sandwich_implementation[n={}]", n.n()), worst, 0.0, where_));
}

fn shift_identity(n: KernelOrder, user: &UserPosition, ctx: &Ctx, out: &mut Vec<CheckResult>) {
    let c = user.cosines();
    let mut worst: f64 = 0.0;
    for h in [0.5, 4.0, 32.0] {
        let implementation = ctx.moments(Rect::centered(h, h), &c).moments[n.index()];
        let shifted = Rect::new(-h - c.big_phi, h - c.big_phi, -h - c.big_theta, h - c.big_theta);
        let oracle = kernel_rect_integral(shifted, n, c.big_psi, &ctx.spec).value[0];
        worst = worst.max(rel(implementation, oracle));
    }
    out.push(check(
        format!("shift_identity[n={}]", n.n()),
        worst,
        1e-8,
        "kernel moment over H vs centered kernel over H shifted by (phi, theta)",
    ));
}

fn recombination(seed: u64, out: &mut Vec<CheckResult>) -> Result<(), ExperimentError> {
    let mut rng = StdRng::seed_from_u64(seed ^ 0x9e37);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let user = UserPosition::new(rng.gen_range(0.05..50.0), rng.gen_range(0.05..3.09), rng.gen_range(0.05..3.09))?;
        let medium = Medium::new(rng.gen_range(1e-3..1.0), rng.gen_range(0.1..10.0))?;
        let mu = rng.gen_range(0.01..=1.0);
        let a = recombined_planar_limit(&user, &medium, mu);
        let b = upa_asymptotic(&user, &medium, mu, true)?.value;
        worst = worst.max(rel(a, b));
    }
    out.push(check("limit_recombination", worst, 1e-12, "1000 random scenarios"));
    Ok(())
}

fn chains(
    cfg: &ScenarioConfig,
    user: &UserPosition,
    medium: &Medium,
    ctx: &Ctx,
    out: &mut Vec<CheckResult>,
) -> Result<(), ExperimentError> {
    let (d, area) = (cfg.d, cfg.element_area);
    let eps = d / user.r();

    let mut worst: f64 = 0.0;
    for m in [25, 51, 101] {
        let array = SpdArray::new(m, m, d, area)?;
        let sum = spd_gain_sum(&array, user, medium, true)?;
        worst = worst.max(rel(sum, ctx.spd_integral(&array, user, medium)?));
    }
    out.push(check("sum_vs_integral", worst, 10.0 * eps * eps, "M per side in {25, 51, 101}; tolerance 10 eps^2"));

    let mut worst: f64 = 0.0;
    for m in [11, 101, 1001] {
        let array = SpdArray::linear(m, d, area)?;
        let closed = ula_gain_closed(&array, user, medium)?;
        worst = worst.max(rel(closed, ula_gain_1d(&array, user, medium, &ctx.spec)?.value));
    }
    out.push(check("ula_closed_vs_quadrature", worst, 1e-9, "M in {11, 101, 1001}"));

    let big = SpdArray::linear(10_000_001, d, area)?;
    let closed = ula_gain_closed(&big, user, medium)?;
    let limit = ula_asymptotic(user, medium, d, area, true)?.value;
    out.push(check("ula_limit", rel(closed, limit), 1e-4, "closed form at M = 10^7 vs limit"));

    let mut worst: f64 = 0.0;
    let w = kernel_params(user, medium)?.moment_weights();
    for m in [25, 101] {
        let array = SpdArray::new(m, m, d, area)?;
        let spd = ctx.spd_integral(&array, user, medium)?;
        let footprint = m as f64 * d / user.r() / 2.0;
        let cap_m = ctx.moments(Rect::centered(footprint, footprint), &user.cosines());
        let cap = cap_prefactor(user, medium) * fold_moments(&cap_m.moments, &w, true);
        worst = worst.max(rel(cap * array.occupation_ratio(), spd));
    }
    out.push(check("aperture_equivalence", worst, 5e-3, "CAP * mu_oc vs SPD integral at L = M d"));

    let mu = cfg.occupation_ratio();
    let upa_limit = upa_asymptotic(user, medium, mu, true)?.value;
    let mut prev = 0.0;
    let mut ok = true;
    let mut worst_ratio: f64 = 0.0;
    for m in [101, 1001, 10_001, 100_001] {
        let g = ctx.spd_integral(&SpdArray::new(m, m, d, area)?, user, medium)?;
        ok &= g > prev;
        prev = g;
        worst_ratio = worst_ratio.max(g / upa_limit);
    }
    out.push(CheckResult {
        name: "integral_below_limit".into(),
        passed: ok && worst_ratio < 1.0,
        measured: worst_ratio,
        tolerance: 1.0,
        detail: format!("increasing in M and below the planar limit {upa_limit:.6e}"),
    });

    let cap_limit = cap_asymptotic(user, medium, true).value;
    out.push(check(
        "occupation_scaling",
        rel(upa_limit, mu * cap_limit),
        1e-14,
        "planar limit = mu_oc * aperture limit",
    ));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_passes() {
        let report = run_verify(&ScenarioConfig::defaults(), &VerifyOptions::default()).unwrap();
        assert!(report.passed(), "{report}");
        for n in [3, 5, 7] {
            assert!(report.checks.iter().any(|c| c.name == format!("sandwich_oracle[n={n}]")));
            assert!(report.checks.iter().any(|c| c.name == format!("shift_identity[n={n}]")));
        }
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(json["checks"].as_array().unwrap().len(), report.checks.len());
    }

    #[test]
    fn perturbed_kernel_is_detected() {
        for order in KernelOrder::ALL {
            for factor in [1.0 + 1e-3, 1.0 - 1e-3] {
                let opts = VerifyOptions { perturbation: Some(Perturbation { order, factor }), ..Default::default() };
                let report = run_verify(&ScenarioConfig::defaults(), &opts).unwrap();
                assert!(!report.passed(), "{order:?} x {factor} went unnoticed");
                assert!(report
                    .failures()
                    .any(|c| c.name.starts_with("sandwich_implementation") || c.name.starts_with("shift_identity")));
            }
        }
    }
}
