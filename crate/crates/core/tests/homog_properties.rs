use std::f64::consts::FRAC_PI_6;

use droplet::homog::{effective_velocity, epsilon_sweep, sine_effective_velocity};
use droplet::{simulate, Beta, DropState, DropletError, Law, Params, SimulateOptions, Tables, VelocityLaw};
use proptest::prelude::*;

fn sine() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.5f64..2.0, 0.05f64..0.9, 0.1f64..3.0).prop_map(|(mean, rel, period)| (mean, rel * mean, period))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn r_is_monotone_with_the_right_sign((mean, amp, period) in sine()) {
        let beta = Beta::sine(mean, amp, period).unwrap();
        let law = Law::new(&beta);
        let (lo, hi) = law.plateau();
        let qs: Vec<f64> = (0..=200).map(|i| -1.0 + 4.0 * mean * f64::from(i) / 200.0).collect();
        let rs: Vec<f64> = qs.iter().map(|&q| law.r(q).unwrap()).collect();
        for w in rs.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        for (&q, &r) in qs.iter().zip(&rs) {
            if q < lo {
                prop_assert!(r < 0.0);
            } else if q > hi {
                prop_assert!(r > 0.0);
            } else {
                prop_assert_eq!(r, 0.0);
            }
        }
    }

    #[test]
    fn quadrature_matches_sine_closed_form((mean, amp, period) in sine(), u in 0.001f64..4.0) {
        let beta = Beta::sine(mean, amp, period).unwrap();
        for q in [mean + amp + u, mean - amp - u] {
            let exact = sine_effective_velocity(q, mean, amp);
            let r = effective_velocity(q, &beta).unwrap();
            prop_assert!((r - exact).abs() <= 1e-6 * exact.abs().max(1.0), "q = {}: {} vs {}", q, r, exact);
        }
    }

    #[test]
    fn r_is_continuous_at_the_plateau_edge((mean, amp, period) in sine()) {
        let beta = Beta::sine(mean, amp, period).unwrap();
        let ladder: Vec<f64> = (0..30)
            .map(|k| effective_velocity(mean + amp + 2f64.powi(-k), &beta).unwrap())
            .collect();
        prop_assert!(ladder.windows(2).all(|w| w[1] < w[0]));
        prop_assert!(ladder[ladder.len() - 1] < 1e-3 * ladder[0]);
    }
}

#[test]
fn sample_points_match_closed_form() {
    let beta = Beta::sine(1.0, 0.3, 1.0).unwrap();
    for q in [1.31, 1.4, 2.0, 5.0] {
        let r = effective_velocity(q, &beta).unwrap();
        assert!((r - sine_effective_velocity(q, 1.0, 0.3)).abs() < 1e-6, "q = {q}");
    }
    assert!((effective_velocity(2.0, &beta).unwrap() - 0.91f64.sqrt()).abs() < 1e-12);
}

#[test]
fn r_is_lipschitz_away_from_the_plateau() {
    let beta = Beta::sine(1.0, 0.3, 1.0).unwrap();
    let law = Law::new(&beta);
    let quotient = |n: usize| {
        let (lo, hi) = (1.3 + 0.05, 4.0);
        let dx = (hi - lo) / n as f64;
        (0..n)
            .map(|i| {
                let x = lo + dx * i as f64;
                (law.r(x + dx).unwrap() - law.r(x).unwrap()) / dx
            })
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (quotient(100), quotient(400));
    assert!(fine.is_finite() && fine < 1.1 * coarse, "{coarse} vs {fine}");
}

fn sweep_tables(v0: f64) -> Tables {
    Tables::new(&Params::new(v0, 1.0, FRAC_PI_6).unwrap()).unwrap()
}

#[test]
fn constant_adhesion_sweep_is_exact_for_every_eps() {
    let tables = sweep_tables(2.0);
    let beta = Beta::constant(1.0).unwrap();
    let report = epsilon_sweep(DropState::new(0.0, 2.0), 2.0, &beta, &[0.1, 0.05], 5e-4, &tables).unwrap();
    for row in &report.rows {
        assert!(row.sup_err() < 1e-6, "{row:?}");
    }
}

#[test]
fn coarse_step_is_refused() {
    let tables = sweep_tables(2.0);
    let beta = Beta::sine(1.0, 0.3, 1.0).unwrap();
    let err = epsilon_sweep(DropState::new(0.0, 2.0), 1.0, &beta, &[0.1, 0.01], 1e-2, &tables).unwrap_err();
    assert!(matches!(err, DropletError::StepTooCoarse { .. }));
    let err = epsilon_sweep(DropState::new(0.0, 2.0), 1.0, &beta, &[0.01, 0.1], 1e-6, &tables).unwrap_err();
    assert!(matches!(err, DropletError::Precondition(_)));
}

#[test]
fn pinned_regime_stays_near_the_stationary_limit() {
    // Oscillation 1.2 exceeds the drive V0 tilt = 1.
    let tables = sweep_tables(2.0);
    let beta = Beta::sine(1.0, 0.6, 1.0).unwrap();
    let law = Law::new(&beta);
    let h = 2e-4;
    let start = DropState::new(0.0, 2.0);
    let opts = SimulateOptions { stride: 10, energy: false, ..Default::default() };
    let hom = simulate(start, 6.0, h, &VelocityLaw::Homogenized(&law), &tables, &opts).unwrap();
    let tail: Vec<_> = hom.samples.iter().filter(|s| s.t >= 3.0).collect();
    let drift = tail[tail.len() - 1].b - tail[0].b;
    assert!(drift.abs() < 1e-9, "homogenized front still moving by {drift}");
    let report = epsilon_sweep(start, 6.0, &beta, &[0.1, 0.05], h, &tables).unwrap();
    for row in &report.rows {
        assert!(row.sup_err() < 2.0 * row.eps, "{row:?}");
    }
}
