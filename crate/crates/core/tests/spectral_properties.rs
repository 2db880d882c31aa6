//! Norm properties of the energy spaces on random models and data.

use num_complex::Complex;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use weakdamp::spectral::{e_gamma_norm, energy_norm, DataVector, SpectralModel};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0x5eed_0001), failure_persistence: None, ..ProptestConfig::default() }
}

/// Random model with positive frequencies and matching random data pairs.
fn model_and_data() -> impl Strategy<Value = (SpectralModel<f64>, DataVector<f64>, DataVector<f64>)> {
    (1usize..12).prop_flat_map(|n| {
        (
            prop::collection::vec((0.01f64..20.0, 0.1f64..3.0), n),
            prop::collection::vec(-5.0f64..5.0, 4 * n),
            prop::collection::vec(-5.0f64..5.0, 4 * n),
        )
            .prop_map(move |(pairs, a, b)| {
                let model = SpectralModel::from_pairs(&pairs, "random").unwrap();
                let data = |x: &[f64]| {
                    let u1 = (0..n).map(|j| Complex::new(x[4 * j], x[4 * j + 1])).collect();
                    let u2 = (0..n).map(|j| Complex::new(x[4 * j + 2], x[4 * j + 3])).collect();
                    DataVector::new(u1, u2).unwrap()
                };
                (model, data(&a), data(&b))
            })
    })
}

fn sum(a: &DataVector<f64>, b: &DataVector<f64>) -> DataVector<f64> {
    let add = |x: &[Complex<f64>], y: &[Complex<f64>]| x.iter().zip(y).map(|(p, q)| p + q).collect();
    DataVector::new(add(&a.u1, &b.u1), add(&a.u2, &b.u2)).unwrap()
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn energy_norm_is_a_norm((model, a, b) in model_and_data(), s in -4.0f64..4.0) {
        let na = energy_norm(&model, &a).unwrap();
        let nb = energy_norm(&model, &b).unwrap();
        let scaled = energy_norm(&model, &a.scale(s)).unwrap();
        prop_assert!((scaled - s.abs() * na).abs() <= 1e-12 * (1.0 + na * s.abs()));
        prop_assert!(energy_norm(&model, &sum(&a, &b)).unwrap() <= (na + nb) * (1.0 + 1e-12));
    }

    #[test]
    fn e_gamma_norm_is_a_norm((model, a, b) in model_and_data(), s in -4.0f64..4.0, gamma in 0.0f64..2.0, n in 0.5f64..4.0) {
        let na = e_gamma_norm(&model, &a, gamma, n).unwrap();
        let nb = e_gamma_norm(&model, &b, gamma, n).unwrap();
        let scaled = e_gamma_norm(&model, &a.scale(s), gamma, n).unwrap();
        prop_assert!((scaled - s.abs() * na).abs() <= 1e-12 * (1.0 + na * s.abs()));
        prop_assert!(e_gamma_norm(&model, &sum(&a, &b), gamma, n).unwrap() <= (na + nb) * (1.0 + 1e-12));
    }

    /// With `N = 1`: `(‖⟨Λ⟩u₁‖ + ‖u₂‖)/2 <= ‖·‖_{E^(0)} <= ‖⟨Λ⟩u₁‖ + ‖u₂‖`.
    #[test]
    fn e0_is_equivalent_to_bracket_norm((model, a, _b) in model_and_data()) {
        let e0 = e_gamma_norm(&model, &a, 0.0, 1.0).unwrap();
        let (mut s1, mut s2) = (0.0, 0.0);
        for (j, p) in model.points().iter().enumerate() {
            s1 += p.weight * (1.0 + p.lambda * p.lambda) * a.u1[j].norm_sqr();
            s2 += p.weight * a.u2[j].norm_sqr();
        }
        let reference = s1.sqrt() + s2.sqrt();
        prop_assert!(e0 <= reference * (1.0 + 1e-12));
        prop_assert!(e0 >= 0.5 * reference * (1.0 - 1e-12));
    }

    /// `[λ]^(-γ)` grows with `γ` only while `[λ] <= 1`, so the frequencies are rescaled into
    /// `(0, 1]` and the default zone constant `N = 1` is used.
    #[test]
    fn e_gamma_is_monotone_below_the_zone_constant((model, a, _b) in model_and_data(), g1 in 0.0f64..1.5, dg in 0.0f64..1.5) {
        let pairs: Vec<(f64, f64)> = model.points().iter().map(|p| (p.lambda / 20.0, p.weight)).collect();
        let model = SpectralModel::from_pairs(&pairs, "rescaled").unwrap();
        let lo = e_gamma_norm(&model, &a, g1, 1.0).unwrap();
        let hi = e_gamma_norm(&model, &a, g1 + dg, 1.0).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12));
    }
}
