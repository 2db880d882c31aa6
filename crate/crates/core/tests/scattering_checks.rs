//! Wave operators, W₋, the scattering operator and asymptotic-equivalence diagnostics.

use num_complex::Complex;

use weakdamp::coefficients::{log_grid, CoefficientModel};
use weakdamp::diagonal::LimitOptions;
use weakdamp::propagator::{free_propagator, integrate_fundamental};
use weakdamp::scattering::{
    energy_estimate_check, modified_wave_operator, scattering_op, scattering_residual, two_sided_ratio, w_minus,
    BackwardHypothesis, Normalization, WaveOperatorTable,
};
use weakdamp::spectral::{BuiltinModel, DataVector, SpectralModel};
use weakdamp::{Error, Mat2, RegimeTag};

fn opts() -> LimitOptions<f64> {
    LimitOptions { tol: 1e-12, limit_tol: 1e-9, horizon_cap: 1e6 }
}

fn c1() -> CoefficientModel<f64> {
    CoefficientModel::mu_over_1pt(0.3).declare(Some(0.3), Some(0.3))
}

fn sigma() -> Mat2<f64> {
    Mat2::diag(1.0, -1.0)
}

/// The system with `-b` is the adjoint system, so `W₊[-b] = W₊[b]^(-T)`; for even `b` this gives
/// `W₋ = σ W₊^(-T) σ`.
#[test]
fn even_coefficient_reflection_symmetry() {
    let c = c1();
    for &lambda in &[1.0, 2.5] {
        let wp = modified_wave_operator(&c, lambda, 1.0, &opts()).unwrap().value;
        let wm = w_minus(&c, lambda, BackwardHypothesis::Invertible { c0: 1.0 }, Normalization::Modified, 1.0, &opts())
            .unwrap();
        let expect = sigma() * wp.inverse().unwrap().transpose() * sigma();
        assert!((wm - expect).max_abs() < 1e-8, "lambda = {lambda}");
    }
}

fn lorentzian() -> CoefficientModel<f64> {
    CoefficientModel::custom(
        "1/(1+t^2)",
        |t: f64| 1.0 / (1.0 + t * t),
        |t: f64| -2.0 * t / (1.0 + t * t).powi(2),
        Some(Box::new(|t: f64| t.atan())),
    )
}

/// `S = W₊W₋⁻¹` against the two-sided limit `𝓔₀(-t)𝓔(t,-t')𝓔₀(-t')`, computed by one integration
/// of the shifted coefficient `b(τ - t')` on `[0, t + t']`.
#[test]
fn scattering_operator_matches_double_limit() {
    let c = lorentzian();
    let lambda = 1.0;
    let wp = modified_wave_operator(&c, lambda, 1.0, &opts()).unwrap().value.scale((-std::f64::consts::FRAC_PI_2).exp());
    let wm = w_minus(&c, lambda, BackwardHypothesis::Integrable, Normalization::Classical, 1.0, &opts()).unwrap();
    let s = scattering_op(&wp, &wm).unwrap();

    let (t, tp) = (2.0e3 * std::f64::consts::PI, 2.0e3 * std::f64::consts::PI);
    let shifted = CoefficientModel::custom(
        "shifted",
        move |x: f64| 1.0 / (1.0 + (x - tp).powi(2)),
        move |x: f64| -2.0 * (x - tp) / (1.0 + (x - tp).powi(2)).powi(2),
        Some(Box::new(move |x: f64| (x - tp).atan() + tp.atan())),
    );
    let e = integrate_fundamental(&shifted, lambda, 0.0, t + tp, 1e-13).unwrap();
    let two_sided = free_propagator(lambda, -t) * e * free_propagator(lambda, -tp);
    // Undo the non-oscillating decay on [-t', t] and restore the full-line one.
    let mass = t.atan() + tp.atan();
    let normalized = two_sided.scale((mass - std::f64::consts::PI).exp());
    assert!((normalized - s).max_abs() < 1e-6, "{:?} vs {:?}", normalized, s);
}

#[test]
fn klein_gordon_w_minus_and_s_are_invertible() {
    let c = c1();
    let model = SpectralModel::builtin(BuiltinModel::KleinGordon { dim: 1, xi_max: 3.0, points: 8 }).unwrap();
    let table = WaveOperatorTable::build(&model, &c, RegimeTag::C1, 0.0, 1.0, &opts())
        .unwrap()
        .with_w_minus(&c, BackwardHypothesis::Invertible { c0: 1.0 }, &opts())
        .unwrap();
    for e in &table.entries {
        let wm = e.w_minus.unwrap();
        assert!(wm.inverse().unwrap().is_finite());
        let s = scattering_op(&e.w_plus, &wm).unwrap();
        assert!(s.is_finite() && s.det().abs() > 1e-3);
    }
    assert!(table.min_singular_value() > 0.1);
}

#[test]
fn w_minus_requires_a_hypothesis() {
    let c = c1();
    let r = w_minus(&c, 0.5, BackwardHypothesis::Invertible { c0: 1.0 }, Normalization::Modified, 1.0, &opts());
    assert!(matches!(r, Err(Error::Precondition(_))));
    let r = w_minus(&c, 2.0, BackwardHypothesis::Integrable, Normalization::Modified, 1.0, &opts());
    assert!(matches!(r, Err(Error::Precondition(_))));
}

/// `|W̃₊| <= C [[λ⁻¹, 1], [λ⁻¹, 1]] [λ]^(-γ)` with `γ = 2μ̄` for `λ <= N = 1`.
#[test]
fn entry_pattern_bound() {
    let c = c1();
    let gamma = 0.6;
    let mut worst: f64 = 0.0;
    for lambda in log_grid(0.01, 1.0, 7) {
        let w = modified_wave_operator(&c, lambda, 1.0, &opts()).unwrap().value;
        let br = lambda.min(1.0).powf(-gamma);
        for i in 0..2 {
            for k in 0..2 {
                let pattern = if k == 0 { 1.0 / lambda } else { 1.0 } * br;
                worst = worst.max(w[(i, k)].abs() / pattern);
            }
        }
        assert!(w.det() > 0.5);
    }
    assert!(worst < 2.0, "{worst}");
}

/// Invertible case, per mode: `‖λ(t)𝓔(t,0) - 𝓔₀(t)W̃₊‖ <= C/(1+t)`.
#[test]
fn invertible_case_rate_per_mode() {
    let c = c1();
    let lambda = 1.5;
    let w = modified_wave_operator(&c, lambda, 1.0, &opts()).unwrap().value;
    let scaled: Vec<f64> = log_grid(10.0, 1e4, 8)
        .into_iter()
        .map(|t| {
            let e = integrate_fundamental(&c, lambda, 0.0, t, 1e-12).unwrap().scale(c.lambda_at(t).unwrap());
            (e - free_propagator(lambda, t) * w).spectral_norm() * (1.0 + t)
        })
        .collect();
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi < 1.0 && hi / lo < 5.0, "{scaled:?}");
}

#[test]
fn free_case_residual_vanishes() {
    let c = CoefficientModel::<f64>::zero();
    let model = SpectralModel::builtin(BuiltinModel::DirichletInterval { k: 6 }).unwrap();
    let data = DataVector::gaussian_bump(&model, 3.0, 1.0).unwrap();
    let table = WaveOperatorTable::build(&model, &c, RegimeTag::Integrable, 0.0, 1.0, &opts()).unwrap();
    assert_eq!(table.normalization, Normalization::Classical);
    let rows = scattering_residual(&model, &c, &data, &table, &[1.0, 10.0, 100.0], 1e-12).unwrap();
    assert!(rows.iter().all(|r| r.residual < 1e-9 && (r.energy_u - r.energy_v).abs() < 1e-9));
}

#[test]
fn residual_needs_entries_for_supported_modes() {
    let c = c1();
    let model = SpectralModel::builtin(BuiltinModel::NeumannInterval { k: 3 }).unwrap();
    let table = WaveOperatorTable::build(&model, &c, RegimeTag::C1, 0.0, 1.0, &opts()).unwrap();
    assert_eq!(table.entries.len(), 3);
    let data = DataVector::kernel_only(&model, Complex::new(0.0, 0.0), Complex::new(1.0, 0.0));
    assert!(scattering_residual(&model, &c, &data, &table, &[1.0], 1e-12).is_err());
    assert!(matches!(two_sided_ratio(&model, &c, &data, &[1.0], 1e-12), Err(Error::Domain(_))));
}

#[test]
fn energy_estimate_is_homogeneous_and_finite() {
    let c = CoefficientModel::<f64>::mu_over_1pt(1.0).declare(Some(1.0), Some(1.0));
    let model = SpectralModel::builtin(BuiltinModel::DirichletInterval { k: 8 }).unwrap();
    let data = DataVector::gaussian_bump(&model, 2.0, 1.0).unwrap();
    let times = log_grid(1.0, 1e3, 12);
    let gamma = 0.01;
    let one = energy_estimate_check(&model, &c, std::slice::from_ref(&data), gamma, 2.0, &times, 1e-12).unwrap();
    let two = energy_estimate_check(&model, &c, &[data.scale(2.0)], gamma, 2.0, &times, 1e-12).unwrap();
    assert!(one.constant.is_finite() && one.constant > 0.0);
    assert!((one.constant - two.constant).abs() < 1e-9 * one.constant);
    let integrable = CoefficientModel::<f64>::power_law(1.0, 2.0);
    assert!(matches!(
        energy_estimate_check(&model, &integrable, &[data], gamma, 2.0, &times, 1e-12),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn two_sided_ratio_is_constant_without_damping() {
    let c = CoefficientModel::<f64>::zero();
    let model = SpectralModel::builtin(BuiltinModel::DirichletInterval { k: 5 }).unwrap();
    let data = DataVector::gaussian_bump(&model, 2.0, 1.0).unwrap();
    let series = two_sided_ratio(&model, &c, &data, &log_grid(1.0, 1e3, 6), 1e-12).unwrap();
    assert!(series.iter().all(|&(_, v)| (v - series[0].1).abs() < 1e-9 * series[0].1));
}
