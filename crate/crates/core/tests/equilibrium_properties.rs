use droplet::equilibrium::{positivity_check, solve_bvp, solve_obstacle};
use droplet::oracle::{fd_bvp_extrapolated, fd_obstacle};
use droplet::tables::critical_length;
use droplet::{Params, Tables};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = Params> {
    (0.2f64..5.0, 0.05f64..10.0, 0.05f64..1.4).prop_map(|(v, k, a)| Params::new(v, k, a).unwrap())
}

fn lc(p: &Params) -> f64 {
    critical_length(p).unwrap().finite().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn volume_and_slope_identity(p in params(), frac in 0.05f64..=1.0, a in -5.0f64..5.0) {
        let u = solve_bvp(a, a + frac * lc(&p), &p).unwrap();
        prop_assert!((u.volume() - p.volume()).abs() <= 1e-8 * p.volume());
        let identity = u.slope_b().powi(2) - u.slope_a().powi(2) - 2.0 * p.tilt() * p.volume();
        prop_assert!(identity.abs() <= 1e-8, "identity defect {}", identity);
    }

    #[test]
    fn translation_invariant(p in params(), frac in 0.05f64..=1.0, d in -50.0f64..50.0) {
        let ell = frac * lc(&p);
        let u = solve_bvp(0.0, ell, &p).unwrap();
        let v = solve_bvp(d, d + ell, &p).unwrap();
        // d + ell - d is ell only up to rounding of the shifted endpoints.
        let tol = 1e-9 * (1.0 + u.lambda().abs() + u.slope_a().abs() + u.slope_b().abs());
        prop_assert!((u.lambda() - v.lambda()).abs() <= tol);
        prop_assert!((u.slope_a() - v.slope_a()).abs() <= tol);
        prop_assert!((u.slope_b() - v.slope_b()).abs() <= tol);
    }

    #[test]
    fn lambda_decreases_with_length(p in params()) {
        let lc = lc(&p);
        let lambdas: Vec<f64> = (1..=40)
            .map(|i| solve_bvp(0.0, lc * f64::from(i) / 40.0, &p).unwrap().lambda())
            .collect();
        prop_assert!(lambdas.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn positivity_flips_at_critical_length(p in params()) {
        let lc = lc(&p);
        for f in [0.5, 0.9, 0.99, 0.999] {
            prop_assert!(positivity_check(&solve_bvp(0.0, f * lc, &p).unwrap()), "ell = {} lc", f);
        }
        for f in [1.001, 1.01, 1.1, 1.5] {
            prop_assert!(!positivity_check(&solve_bvp(0.0, f * lc, &p).unwrap()), "ell = {} lc", f);
        }
    }

    #[test]
    fn obstacle_keeps_critical_support(p in params(), extra in 0.01f64..3.0) {
        let lc = lc(&p);
        let b = 1.0 + lc + extra;
        let u = solve_obstacle(1.0, b, &p).unwrap();
        let v = solve_bvp(b - lc, b, &p).unwrap();
        prop_assert!((u.support_left() - (b - lc)).abs() <= 1e-12 * b.abs().max(1.0));
        prop_assert!(u.slope_a().abs() <= 1e-9 * (1.0 + u.slope_b().abs()));
        for i in 0..=16 {
            let x = b - lc + lc * f64::from(i) / 16.0;
            prop_assert!((u.eval(x) - v.eval(x)).abs() <= 1e-12 * (1.0 + v.lambda().abs()));
        }
    }

    #[test]
    fn no_tilt_gives_symmetric_drop(v in 0.2f64..5.0, k in 0.0f64..10.0, ell in 0.1f64..10.0) {
        let p = Params::new(v, k, 0.0).unwrap();
        let u = solve_bvp(0.0, ell, &p).unwrap();
        prop_assert!((u.slope_a() + u.slope_b()).abs() <= 1e-10 * u.slope_a().abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn agrees_with_finite_differences(p in params(), frac in 0.2f64..=1.0, a in -2.0f64..2.0) {
        let b = a + frac * lc(&p);
        let u = solve_bvp(a, b, &p).unwrap();
        let [lambda, slope_a, slope_b] = fd_bvp_extrapolated(a, b, &p, 1024).unwrap();
        let scale = 1.0 + u.lambda().abs();
        prop_assert!((u.lambda() - lambda).abs() <= 1e-6 * scale, "{} vs {}", u.lambda(), lambda);
        prop_assert!((u.slope_a() - slope_a).abs() <= 1e-6 * scale);
        prop_assert!((u.slope_b() - slope_b).abs() <= 1e-6 * scale);
    }
}

#[test]
fn reference_case_matches_finite_differences() {
    let p = Params::new(1.0, 1.0, std::f64::consts::FRAC_PI_6).unwrap();
    let u = solve_bvp(0.0, 1.5, &p).unwrap();
    let [lambda, slope_a, slope_b] = fd_bvp_extrapolated(0.0, 1.5, &p, 4096).unwrap();
    assert!((u.lambda() - lambda).abs() < 1e-6);
    assert!((u.slope_a() - slope_a).abs() < 1e-6);
    assert!((u.slope_b() - slope_b).abs() < 1e-6);
}

#[test]
fn obstacle_oracle_support_stays_critical() {
    let p = Params::new(1.0, 1.0, std::f64::consts::FRAC_PI_6).unwrap();
    let lc = Tables::new(&p).unwrap().critical_length().finite().unwrap();
    for grow in [1.2, 1.6, 2.0] {
        let b = grow * lc;
        let fd = fd_obstacle(0.0, b, &p, 400).unwrap();
        let support = b - fd.support_left;
        assert!((support - lc).abs() <= 2.0 * fd.spacing(), "b - a = {b}: support {support} vs {lc}");
    }
}
