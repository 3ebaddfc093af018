use std::f64::consts::PI;

use nearfield_gain::closed_forms::{cap_asymptotic, ratio_spd, upa_asymptotic};
use nearfield_gain::discrete::spd_gain_sum;
use nearfield_gain::experiments::{read_csv, validate_csv, write_csv, ArrayKind, ScenarioConfig, SweepRecord};
use nearfield_gain::geometry::{direction_cosines, element_distance, spd_region, Medium, Rect, SpdArray, UserPosition};
use nearfield_gain::integral::{moment_integral, spd_gain_integral};
use nearfield_gain::kernels::KernelOrder;
use nearfield_gain::oracle::{disk_integral, sandwich_check, sandwich_rect};
use nearfield_gain::QuadratureSpec;
use proptest::prelude::*;

const D: f64 = 0.0628;
const LAMBDA: f64 = 2.0 * D;

fn area() -> f64 {
    LAMBDA * LAMBDA / (4.0 * PI)
}

fn defaults() -> (UserPosition, Medium) {
    (UserPosition::new(5.0, PI / 6.0, PI / 3.0).unwrap(), Medium::new(LAMBDA, 1.0).unwrap())
}

fn order() -> impl Strategy<Value = KernelOrder> {
    prop::sample::select(KernelOrder::ALL.to_vec())
}

fn odd(max_half: usize) -> impl Strategy<Value = usize> {
    (0..=max_half).prop_map(|k| 2 * k + 1)
}

fn angle() -> impl Strategy<Value = f64> {
    1e-6f64..PI - 1e-6
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn direction_cosines_are_unit_norm(theta in angle(), phi in angle()) {
        let c = direction_cosines(theta, phi).unwrap();
        prop_assert!((c.norm_sq() - 1.0).abs() <= 1e-12);
        prop_assert!(c.big_psi > 0.0);
    }

    #[test]
    fn element_distance_is_euclidean(
        r in 0.1f64..100.0, theta in angle(), phi in angle(),
        mx in -1000i64..=1000, mz in -1000i64..=1000, d in 1e-3f64..1.0,
    ) {
        let u = UserPosition::new(r, theta, phi).unwrap();
        let s = u.cartesian();
        let p = [mx as f64 * d, 0.0, mz as f64 * d];
        let euclid = ((p[0] - s[0]).powi(2) + (p[1] - s[1]).powi(2) + (p[2] - s[2]).powi(2)).sqrt();
        prop_assert!((element_distance(&u, mx, mz, d) - euclid).abs() <= 1e-12 * euclid);
    }

    #[test]
    fn region_scales_with_size_spacing_and_distance(
        mx in odd(500), mz in odd(500), d in 0.04f64..1.0, r in 0.5f64..100.0, k in 2.0f64..10.0,
    ) {
        let u = UserPosition::new(r, 1.0, 1.0).unwrap();
        let base = spd_region(&SpdArray::new(mx, mz, d, 1e-3).unwrap(), &u).rect;
        prop_assert!((base.width() - mx as f64 * d / r).abs() <= 1e-12 * base.width());
        prop_assert!((base.height() - mz as f64 * d / r).abs() <= 1e-12 * base.height());
        let wide = spd_region(&SpdArray::new(mx, mz, k * d, 1e-3).unwrap(), &u).rect;
        prop_assert!((wide.width() - k * base.width()).abs() <= 1e-12 * wide.width());
        let far = spd_region(&SpdArray::new(mx, mz, d, 1e-3).unwrap(), &UserPosition::new(k * r, 1.0, 1.0).unwrap()).rect;
        prop_assert!((far.width() * k - base.width()).abs() <= 1e-12 * base.width());
    }

    #[test]
    fn sum_increases_with_either_count(mx in odd(60), mz in odd(60), theta in 0.2f64..2.9, phi in 0.2f64..2.9) {
        let u = UserPosition::new(5.0, theta, phi).unwrap();
        let m = Medium::new(LAMBDA, 1.0).unwrap();
        let g = |a: usize, b: usize| spd_gain_sum(&SpdArray::new(a, b, D, area()).unwrap(), &u, &m, true).unwrap();
        let base = g(mx, mz);
        prop_assert!(g(mx + 2, mz) > base);
        prop_assert!(g(mx, mz + 2) > base);
    }

    #[test]
    fn sum_stays_below_planar_limit(m in odd(400)) {
        let (u, med) = defaults();
        let g = spd_gain_sum(&SpdArray::new(m, m, D, area()).unwrap(), &u, &med, true).unwrap();
        prop_assert!(g < upa_asymptotic(&u, &med, 1.0 / PI, true).unwrap().value);
    }

    #[test]
    fn planar_ratio_matches_aperture_ratio(r in 0.01f64..100.0, theta in 0.1f64..3.0, phi in 0.1f64..3.0) {
        let u = UserPosition::new(r, theta, phi).unwrap();
        let m = Medium::new(LAMBDA, 1.0).unwrap();
        let cap = cap_asymptotic(&u, &m, true).value / cap_asymptotic(&u, &m, false).value;
        let upa = upa_asymptotic(&u, &m, 0.3, true).unwrap().value / upa_asymptotic(&u, &m, 0.3, false).unwrap().value;
        prop_assert!((cap - ratio_spd(&u, &m)).abs() <= 1e-15);
        prop_assert!((upa - ratio_spd(&u, &m)).abs() <= 1e-15);
    }

    #[test]
    fn config_round_trips(
        r in 0.1f64..100.0, theta in angle(), phi in angle(), d in 0.01f64..1.0,
        lambda in 1e-3f64..1.0, fill in 0.01f64..1.0, factor in 0.1f64..10.0, kind in 0usize..3,
    ) {
        let cfg = ScenarioConfig {
            r, theta, phi, d, lambda,
            element_area: fill * d * d,
            radiation_factor: factor,
            array_kind: [ArrayKind::SpdUpa, ArrayKind::SpdUla, ArrayKind::Cap][kind],
        };
        let back = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(&back, &cfg);
    }

    #[test]
    fn csv_round_trips(rows in prop::collection::vec((0.0f64..1e9, 1e-12f64..1e3, 1e-3f64..1.0, 0.0f64..1e6, 1e-12f64..1e3), 0..20)) {
        let records: Vec<SweepRecord> = rows
            .iter()
            .map(|&(v, rad, shrink, far, lim)| {
                let eva = rad * shrink;
                SweepRecord {
                    var_name: "elements".into(),
                    var_value: v,
                    gain_eva: eva,
                    gain_rad: rad,
                    gain_far: far,
                    limit_eva: lim * shrink,
                    limit_rad: lim,
                    ratio_db: 10.0 * (eva / rad).log10(),
                }
            })
            .collect();
        let mut a = Vec::new();
        write_csv(&records, &mut a).unwrap();
        let mut b = Vec::new();
        write_csv(&records, &mut b).unwrap();
        prop_assert_eq!(&a, &b);
        let text = String::from_utf8(a).unwrap();
        prop_assert_eq!(validate_csv(&text).unwrap(), records.len());
        prop_assert_eq!(read_csv(&text).unwrap(), records);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integral_is_additive(
        hx in 0.05f64..3.0, hz in 0.05f64..3.0, sx in 0.05f64..0.95, sz in 0.05f64..0.95,
        theta in 0.3f64..2.8, phi in 0.3f64..2.8,
    ) {
        let c = direction_cosines(theta, phi).unwrap();
        let spec = QuadratureSpec::with_tolerance(1e-11).unwrap();
        let whole = Rect::centered(hx, hz);
        let xm = -hx + 2.0 * hx * sx;
        let zm = -hz + 2.0 * hz * sz;
        let parts = [
            Rect::new(-hx, xm, -hz, zm),
            Rect::new(xm, hx, -hz, zm),
            Rect::new(-hx, xm, zm, hz),
            Rect::new(xm, hx, zm, hz),
        ];
        let total = moment_integral(whole, &c, &spec);
        for k in 0..3 {
            let sum: f64 = parts.iter().map(|p| moment_integral(*p, &c, &spec).moments[k]).sum();
            prop_assert!((sum - total.moments[k]).abs() <= 1e-9 * total.moments[k]);
        }
    }

    #[test]
    fn halving_tolerance_stays_within_error_estimate(m in odd(200), theta in 0.3f64..2.8, phi in 0.3f64..2.8, tol in 1e-10f64..1e-5) {
        let u = UserPosition::new(5.0, theta, phi).unwrap();
        let med = Medium::new(LAMBDA, 1.0).unwrap();
        let a = SpdArray::new(m, m, D, area()).unwrap();
        let coarse = spd_gain_integral(&a, &u, &med, &QuadratureSpec::with_tolerance(tol).unwrap(), true).unwrap();
        let fine = spd_gain_integral(&a, &u, &med, &QuadratureSpec::with_tolerance(tol / 2.0).unwrap(), true).unwrap();
        prop_assert!((fine.value - coarse.value).abs() <= coarse.error_estimate + 1e-15 * coarse.value);
    }

    #[test]
    fn strict_sandwich(mx in odd(500), mz in odd(500), eps in 1e-3f64..0.1, n in order(), psi in 0.05f64..1.0) {
        let spec = QuadratureSpec::with_tolerance(1e-11).unwrap();
        let w = sandwich_check(mx, mz, eps, n, psi, &spec);
        prop_assert!(w.is_ok(), "{:?}", w);
    }

    #[test]
    fn limit_gap_shrinks_along_doubling(n in order(), psi in 0.05f64..1.0, h0 in 0.1f64..2.0) {
        let spec = QuadratureSpec::with_tolerance(1e-11).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..6 {
            let h = h0 * f64::powi(2.0, k);
            let gap = sandwich_rect(h, h, n, psi, &spec).unwrap().limit_gap();
            prop_assert!(gap < prev);
            prev = gap;
        }
    }

    #[test]
    fn disk_integral_increases_with_radius(n in order(), psi in 0.01f64..2.0, r in 0.0f64..100.0, dr in 1e-6f64..10.0) {
        let (a, b) = (disk_integral(n, psi, r), disk_integral(n, psi, r + dr));
        prop_assert!(b >= a);
        // strict while the remaining tail is resolvable in double precision
        if r < 10.0 * psi {
            prop_assert!(b > a);
        }
    }
}
