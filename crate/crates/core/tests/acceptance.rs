//! End-to-end acceptance criteria. Runs every criterion, prints one PASS/FAIL
//! line each, and exits nonzero if any failed.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nearfield_gain::closed_forms::{
    ratio_spd_excess, ratio_spd_from_perpendicular, ratio_spd_threshold, ula_asymptotic, ula_gain_closed, ula_ratio,
    upa_asymptotic,
};
use nearfield_gain::discrete::spd_gain_sum;
use nearfield_gain::experiments::{elements_sweep, log_odd_counts, log_space, ratio_sweep, ScenarioConfig};
use nearfield_gain::geometry::{CapAperture, Medium, SpdArray, UserPosition};
use nearfield_gain::integral::{cap_gain_integral, spd_gain_integral, ula_gain_1d};
use nearfield_gain::kernels::{green_magnitude_sq, KernelOrder};
use nearfield_gain::oracle::{recombined_planar_limit, sandwich_rect};
use nearfield_gain::QuadratureSpec;
use num_complex::Complex64;
use rand::{rngs::StdRng, Rng, SeedableRng};

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

struct Defaults {
    cfg: ScenarioConfig,
    user: UserPosition,
    medium: Medium,
}

fn defaults() -> Defaults {
    let cfg = ScenarioConfig::defaults();
    Defaults { user: cfg.user().unwrap(), medium: cfg.medium().unwrap(), cfg }
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn planar_ratio_anchor() -> Outcome {
    let lambda = defaults().cfg.lambda;
    let v = ratio_spd_from_perpendicular(lambda, lambda);
    outcome((v - 0.99168).abs() <= 1e-4, format!("ratio at r*psi = lambda is {v:.6}, expected 0.99168"))
}

fn linear_ratio_anchor() -> Outcome {
    let d = defaults();
    let a = d.user.cosines().a_phi_sq().sqrt();
    let user = UserPosition::from_cosines(d.cfg.lambda / a, d.user.cosines()).unwrap();
    let v = ula_ratio(&user, &d.medium).unwrap();
    outcome((v - 0.98346).abs() <= 1e-4, format!("ratio at r*a = lambda is {v:.6}, expected 0.98346"))
}

fn threshold_witness() -> Outcome {
    let lambda = defaults().cfg.lambda;
    let (mut lo, mut hi) = (1e-3 * lambda, lambda);
    assert!(ratio_spd_from_perpendicular(lo, lambda) > 1.0 && ratio_spd_from_perpendicular(hi, lambda) < 1.0);
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if ratio_spd_excess(mid, lambda) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let expect = (3.0f64 / 20.0).sqrt() * lambda / PI;
    let err = rel(root, expect).max(rel(ratio_spd_threshold(lambda), expect));
    outcome(err <= 1e-9, format!("crossing at r*psi = {root:.12e} m, relative error {err:.1e}"))
}

fn convergence_to_planar_limit() -> Outcome {
    let d = defaults();
    let limit = upa_asymptotic(&d.user, &d.medium, d.cfg.occupation_ratio(), true).unwrap().value;
    let mut ok = true;
    let mut parts = Vec::new();
    for (m, tol) in [(2001, 1e-2), (10001, 2e-3)] {
        let array = SpdArray::new(m, m, d.cfg.d, d.cfg.element_area).unwrap();
        let g = spd_gain_sum(&array, &d.user, &d.medium, true).unwrap();
        let err = rel(g, limit);
        ok &= err <= tol;
        parts.push(format!(
            "M={m}: gain {g:.6e} vs limit {limit:.6e}, off by {:.3}% (allowed {}%)",
            err * 100.0,
            tol * 100.0
        ));
    }
    outcome(ok, parts.join("; "))
}

fn sum_matches_integral() -> Outcome {
    let d = defaults();
    let eps = d.cfg.d / d.cfg.r;
    let tol = 10.0 * eps * eps;
    let mut worst: f64 = 0.0;
    for m in [25, 51, 101] {
        let array = SpdArray::new(m, m, d.cfg.d, d.cfg.element_area).unwrap();
        let sum = spd_gain_sum(&array, &d.user, &d.medium, true).unwrap();
        let int = spd_gain_integral(&array, &d.user, &d.medium, &spec(), true).unwrap();
        assert!(int.converged);
        worst = worst.max(rel(sum, int.value));
    }
    outcome(worst <= tol, format!("worst |sum - integral| / integral = {worst:.3e}, allowed {tol:.3e}"))
}

fn aperture_equivalence() -> Outcome {
    let d = defaults();
    let mu = d.cfg.occupation_ratio();
    let mut worst: f64 = 0.0;
    for m in [25, 101, 501] {
        let array = SpdArray::new(m, m, d.cfg.d, d.cfg.element_area).unwrap();
        let side = m as f64 * d.cfg.d;
        let cap = cap_gain_integral(&CapAperture::new(side, side).unwrap(), &d.user, &d.medium, &spec(), true).unwrap();
        let spd = spd_gain_integral(&array, &d.user, &d.medium, &spec(), true).unwrap();
        worst = worst.max(rel(cap.value * mu, spd.value));
    }
    outcome(worst <= 5e-3, format!("mu_oc = {mu:.6}; worst relative mismatch {worst:.3e}, allowed 5e-3"))
}

fn linear_closed_form() -> Outcome {
    let d = defaults();
    let mut worst: f64 = 0.0;
    for m in [11, 101, 1001] {
        let array = SpdArray::linear(m, d.cfg.d, d.cfg.element_area).unwrap();
        let closed = ula_gain_closed(&array, &d.user, &d.medium).unwrap();
        let quad = ula_gain_1d(&array, &d.user, &d.medium, &QuadratureSpec::with_tolerance(1e-12).unwrap()).unwrap();
        worst = worst.max(rel(closed, quad.value));
    }
    outcome(worst <= 1e-9, format!("worst relative difference {worst:.3e}, allowed 1e-9"))
}

fn linear_limit() -> Outcome {
    let d = defaults();
    let array = SpdArray::linear(10_000_001, d.cfg.d, d.cfg.element_area).unwrap();
    let closed = ula_gain_closed(&array, &d.user, &d.medium).unwrap();
    let limit = ula_asymptotic(&d.user, &d.medium, d.cfg.d, d.cfg.element_area, true).unwrap().value;
    let err = rel(closed, limit);
    outcome(err <= 1e-4, format!("M = 10^7: {closed:.8e} vs limit {limit:.8e}, relative {err:.2e}"))
}

fn disk_sandwich() -> Outcome {
    let spec = QuadratureSpec::with_tolerance(1e-11).unwrap();
    let mut bound_failures = Vec::new();
    let mut monotone = true;
    let mut limit_failures = Vec::new();
    let mut worst_gap: [f64; 3] = [0.0; 3];
    for n in KernelOrder::ALL {
        for psi in [0.1, 0.433, 0.9] {
            let mut prev: Option<f64> = None;
            let mut gap_at_64 = f64::NAN;
            for h in [1.0, 4.0, 16.0, 64.0] {
                match sandwich_rect(h, h, n, psi, &spec) {
                    Ok(w) => {
                        if let Some(p) = prev {
                            monotone &= w.centered > p;
                        }
                        prev = Some(w.centered);
                        gap_at_64 = w.limit_gap();
                    }
                    Err(e) => bound_failures.push(e.to_string()),
                }
            }
            worst_gap[n.index()] = worst_gap[n.index()].max(gap_at_64);
            if gap_at_64.is_nan() || gap_at_64 > 1e-3 {
                limit_failures.push(format!("n={} psi={psi}: {gap_at_64:.2e}", n.n()));
            }
        }
    }
    let detail = format!(
        "strict bounds: {} violations; monotone: {monotone}; relative gap to limit at half-width 64 \
         (n=3,5,7): {:.2e}, {:.2e}, {:.2e}, allowed 1e-3{}",
        bound_failures.len(),
        worst_gap[0],
        worst_gap[1],
        worst_gap[2],
        if limit_failures.is_empty() { String::new() } else { format!("; over: {}", limit_failures.join(", ")) }
    );
    outcome(bound_failures.is_empty() && monotone && limit_failures.is_empty(), detail)
}

fn recombination() -> Outcome {
    let mut rng = StdRng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let user = UserPosition::new(rng.gen_range(0.01..100.0), rng.gen_range(0.01..3.13), rng.gen_range(0.01..3.13))
            .unwrap();
        let medium = Medium::new(rng.gen_range(1e-3..1.0), rng.gen_range(0.1..10.0)).unwrap();
        let mu = rng.gen_range(1e-3..=1.0);
        let a = recombined_planar_limit(&user, &medium, mu);
        let b = upa_asymptotic(&user, &medium, mu, true).unwrap().value;
        worst = worst.max(rel(a, b));
    }
    outcome(worst <= 1e-12, format!("1000 random points, worst relative difference {worst:.2e}"))
}

fn far_field_divergence() -> Outcome {
    let d = defaults();
    let counts = log_odd_counts(5, 2001, 24).unwrap();
    let sweep = elements_sweep(&d.cfg, &counts, &spec()).unwrap();
    let first_over = sweep.records.iter().find(|r| r.gain_far > 1.0).map(|r| r.var_value);
    let below = sweep.records.iter().all(|r| r.gain_eva < r.limit_eva);
    let max_ratio = sweep.records.iter().map(|r| r.gain_eva / r.limit_eva).fold(0.0, f64::max);
    outcome(
        first_over.is_some() && below,
        format!(
            "far-field gain first exceeds 1 at M = {}; gain / limit at most {max_ratio:.4}",
            first_over.map_or("never".into(), |m| format!("{m}"))
        ),
    )
}

fn ratio_ordering() -> Outcome {
    let d = defaults();
    let areas = log_space(1e-3, 1e2, 16).unwrap();
    let distances = [1.0, 5.0, 25.0];
    let sweep = ratio_sweep(&d.cfg, &areas, &distances, &spec()).unwrap();
    let max_db = sweep.records.iter().map(|r| r.ratio_db).fold(f64::NEG_INFINITY, f64::max);
    let n = areas.len();
    let ordered = (0..n).all(|i| {
        let s = |k: usize| sweep.records[k * n + i].ratio_db;
        s(0) < s(1) && s(1) < s(2)
    });
    outcome(
        max_db < 0.0 && ordered,
        format!(
            "{} rows, largest ratio {max_db:.3e} dB; ordered by distance at every aperture: {ordered}",
            sweep.records.len()
        ),
    )
}

fn kernel_identity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let u: f64 = rng.gen_range(0.0..5.0);
        let z = Complex64::new(1.0 - u * u, u);
        worst = worst.max(rel(green_magnitude_sq(u), z.norm_sqr()));
    }
    outcome(worst <= 1e-13, format!("1000 random u, worst relative difference {worst:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("planar reactive ratio anchor", Duration::from_secs(1), planar_ratio_anchor),
        ("linear reactive ratio anchor", Duration::from_secs(1), linear_ratio_anchor),
        ("ratio threshold crossing", Duration::from_secs(1), threshold_witness),
        ("discrete sum converges to planar limit", Duration::from_secs(30), convergence_to_planar_limit),
        ("element sum matches integral form", Duration::from_secs(10), sum_matches_integral),
        ("aperture gain times occupation equals discrete gain", Duration::from_secs(10), aperture_equivalence),
        ("linear closed form matches quadrature", Duration::from_secs(5), linear_closed_form),
        ("linear closed form reaches its limit", Duration::from_secs(1), linear_limit),
        ("disk sandwich and limit convergence", Duration::from_secs(30), disk_sandwich),
        ("disk limits recombine to planar limit", Duration::from_secs(1), recombination),
        ("far-field gain diverges, near-field stays bounded", Duration::from_secs(5), far_field_divergence),
        ("reactive ratio below 0 dB and ordered by distance", Duration::from_secs(30), ratio_ordering),
        ("green magnitude identity", Duration::from_secs(1), kernel_identity),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let passed = out.passed && in_time;
        failed += usize::from(!passed);
        println!(
            "{} {:>2} {name}: {} [{:.2} s{}]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed.as_secs_f64(),
            if in_time { String::new() } else { format!(", over the {} s budget", budget.as_secs()) },
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
