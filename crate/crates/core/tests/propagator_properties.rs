//! Structural properties of the fundamental solution on random frequencies and times.

use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use weakdamp::coefficients::CoefficientModel;
use weakdamp::propagator::{free_propagator, integrate_fundamental, kernel_mode_solution};
use weakdamp::quadrature::QuadOptions;
use weakdamp::Mat2;

const TOL: f64 = 1e-12;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0x5eed_0002), failure_persistence: None, ..ProptestConfig::default() }
}

fn coefficients() -> Vec<CoefficientModel<f64>> {
    vec![
        CoefficientModel::mu_over_1pt(0.3),
        CoefficientModel::mu_over_1pt(1.0),
        CoefficientModel::power_law(1.0, 2.0),
        CoefficientModel::iterated_log(0.7, 1),
    ]
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn cocycle(k in 0usize..4, lambda in 0.05f64..20.0, r in 0.0f64..20.0, ds in 0.0f64..20.0, dt in 0.0f64..20.0) {
        let c = &coefficients()[k];
        let (s, t) = (r + ds, r + ds + dt);
        let ets = integrate_fundamental(c, lambda, s, t, TOL).unwrap();
        let esr = integrate_fundamental(c, lambda, r, s, TOL).unwrap();
        let etr = integrate_fundamental(c, lambda, r, t, TOL).unwrap();
        prop_assert!((ets * esr - etr).max_abs() < 1e-9);
    }

    #[test]
    fn contractive_with_liouville_determinant(k in 0usize..4, lambda in 0.0f64..20.0, s in 0.0f64..30.0, dt in 0.0f64..30.0) {
        let c = &coefficients()[k];
        let t = s + dt;
        let e = integrate_fundamental(c, lambda, s, t, TOL).unwrap();
        prop_assert!(e.spectral_norm() <= 1.0 + 10.0 * TOL.sqrt());
        let expect = (-2.0 * c.integral(s, t, &QuadOptions::default()).unwrap()).exp();
        prop_assert!((e.det() - expect).abs() <= 1e-9 * expect.max(1e-3));
    }

    #[test]
    fn free_group_property(lambda in 0.0f64..50.0, t in -100.0f64..100.0) {
        prop_assert!((free_propagator(lambda, t) * free_propagator(lambda, -t) - Mat2::identity()).max_abs() < 1e-14);
    }

    #[test]
    fn kernel_first_integral(k in 0usize..4, u1 in -3.0f64..3.0, u2 in -3.0f64..3.0, t in 0.0f64..1e3) {
        let c = &coefficients()[k];
        let (_, du) = kernel_mode_solution(c, u1.into(), u2.into(), t).unwrap();
        let lam = c.lambda_at(t).unwrap();
        prop_assert!((du.re * lam * lam - u2).abs() <= 1e-9 * (1.0 + u2.abs()));
    }
}

/// Per-mode energy identity `d/dt(|v₁|² + |v₂|²) = -4b|v₂|²`, checked by a centered difference of
/// the computed solution.
#[test]
fn energy_identity() {
    let c = CoefficientModel::<f64>::mu_over_1pt(0.3);
    let (lambda, h) = (2.0, 1e-4);
    for &t in &[0.5, 3.0, 17.0] {
        let v = |t: f64| integrate_fundamental(&c, lambda, 0.0, t, TOL).unwrap().apply([0.6, -0.8]);
        let energy = |v: [f64; 2]| v[0] * v[0] + v[1] * v[1];
        let derivative = (energy(v(t + h)) - energy(v(t - h))) / (2.0 * h);
        let vt = v(t);
        assert!((derivative + 4.0 * c.b(t) * vt[1] * vt[1]).abs() < 1e-7, "t = {t}");
    }
}

#[test]
fn self_convergence_integrable() {
    let c = CoefficientModel::<f64>::power_law(1.0, 2.0);
    let fine = integrate_fundamental(&c, 1.0, 0.0, 100.0, 1e-13).unwrap().apply([1.0, 0.0]);
    let coarse = integrate_fundamental(&c, 1.0, 0.0, 100.0, 1e-6).unwrap().apply([1.0, 0.0]);
    let mid = integrate_fundamental(&c, 1.0, 0.0, 100.0, 1e-12).unwrap().apply([1.0, 0.0]);
    let err = |a: [f64; 2]| ((a[0] - fine[0]).powi(2) + (a[1] - fine[1]).powi(2)).sqrt();
    assert!(err(mid) < 1e-10);
    assert!(err(coarse) < 1e-4);
}
