use std::f64::consts::{FRAC_PI_2, PI, TAU};

use polariphase::analysis::{
    fit_harmonic, phase_from_extrema_mixed, phase_from_offsets, ExtremaEstimate, ExtremaOffsets, IntensityScan, Sample,
};
use polariphase::beamline::{analytic_extrema, mixed_intensity, propagate, BeamlineConfig, CoilSpec};
use polariphase::counting::{point_rng, sample_poisson, Channel};
use polariphase::spin::{bloch_apply, AxisAngle, BlochState, Su2Params};
use polariphase::{mix_scans, MixingSpec};
use proptest::prelude::*;

fn xi_strategy() -> impl Strategy<Value = f64> {
    (0.0..PI).prop_filter("cos ξ too small", |x| (x - FRAC_PI_2).abs() > 1e-3)
}

fn delta_strategy() -> impl Strategy<Value = f64> {
    -FRAC_PI_2 + 1e-9..FRAC_PI_2 - 1e-9
}

fn params() -> impl Strategy<Value = Su2Params> {
    (xi_strategy(), delta_strategy(), -PI..PI).prop_map(|(x, d, z)| Su2Params::new(x, d, z))
}

fn analytic(r: f64, p: &Su2Params) -> ExtremaEstimate {
    let e = analytic_extrema(r, p);
    ExtremaEstimate::exact(e.min, e.max)
}

fn basis7(eta: f64) -> [f64; 7] {
    [
        1.0,
        (2.0 * eta).cos(),
        (2.0 * eta).sin(),
        eta.cos(),
        eta.sin(),
        (0.5 * eta).cos(),
        (0.5 * eta).sin(),
    ]
}

fn synth(coef: &[f64; 7]) -> IntensityScan {
    IntensityScan {
        samples: (0..41)
            .map(|k| {
                let eta = 4.0 * TAU * k as f64 / 40.0;
                let value = basis7(eta).iter().zip(coef).map(|(b, c)| b * c).sum();
                Sample { eta, value, sigma: 0.0 }
            })
            .collect(),
        live_time_s: 1.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn offset_phase_equals_arctan(r in 1e-6..=1.0f64, p in params()) {
        let got = phase_from_offsets(&ExtremaOffsets::analytic(r, &p), r).unwrap().phi;
        let want = (r * p.delta.tan().abs()).atan();
        prop_assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    // Absolute extrema near 1/2 resolve offsets only to ~1e-16, so the
    // identity is checked where both offsets are well above that.
    #[test]
    fn extrema_phase_equals_arctan(
        (r, p) in (1e-3..=1.0f64, params()).prop_filter("ill-conditioned", |(r, p)| {
            let o = ExtremaOffsets::analytic(*r, p);
            o.excess > 1e-3 && o.deficit > 1e-3
        })
    ) {
        let got = phase_from_extrema_mixed(&analytic(r, &p), r).unwrap().phi;
        let want = (r * p.delta.tan().abs()).atan();
        prop_assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn params_round_trip(p in (0.0..=PI, -PI..PI, -PI..PI).prop_map(|(x, d, z)| Su2Params::new(x, d, z))) {
        let u = p.to_matrix();
        let back = Su2Params::from_matrix(&u).unwrap().params;
        prop_assert!(back.to_matrix().max_abs_diff(&u) < 1e-12);
        let again = Su2Params::from_matrix(&back.to_matrix()).unwrap().params;
        prop_assert!((again.xi - back.xi).abs() < 1e-9);
        prop_assert!((again.delta - back.delta).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn chain_matches_closed_form(r in 0.0..=1.0f64, p in params(), eta in 0.0..TAU) {
        let cfg = BeamlineConfig::ideal(r, CoilSpec::Params(p));
        let got = propagate(&cfg, eta).unwrap();
        prop_assert!((got - mixed_intensity(r, &p, eta)).abs() < 1e-12);
        prop_assert!((propagate(&cfg, eta + PI).unwrap() - got).abs() < 1e-12);
        let flipped = propagate(&cfg.clone().with_flipper(true), eta).unwrap();
        prop_assert!((flipped - (1.0 - got)).abs() < 1e-12);
    }

    #[test]
    fn phase_increases_with_polarization(
        p in params().prop_filter("δ ≈ 0", |p| p.delta.abs() > 1e-3),
        r1 in 0.01..0.99f64,
        dr in 1e-3..0.5f64,
    ) {
        let r2 = (r1 + dr).min(1.0);
        let a = phase_from_extrema_mixed(&analytic(r1, &p), r1).unwrap().phi;
        let b = phase_from_extrema_mixed(&analytic(r2, &p), r2).unwrap().phi;
        prop_assert!(b > a, "Φ({r1}) = {a}, Φ({r2}) = {b}");
    }

    #[test]
    fn fit_reproduces_coefficients(coef in prop::array::uniform7(-0.3..0.3f64)) {
        let fit = fit_harmonic(&synth(&coef), true).unwrap();
        for (a, b) in fit.coefficients.iter().zip(coef) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn mixing_commutes_with_fitting(
        off in prop::array::uniform7(-0.3..0.3f64),
        on in prop::array::uniform7(-0.3..0.3f64),
        r0 in 0.1..=1.0f64,
        frac in 0.0..=1.0f64,
    ) {
        let spec = MixingSpec::new(frac * r0, r0).unwrap();
        let w = spec.weight();
        let mixed = mix_scans(&synth(&off), &synth(&on), &spec).unwrap();
        let fit = fit_harmonic(&mixed, true).unwrap();
        let fo = fit_harmonic(&synth(&off), true).unwrap();
        let fn_ = fit_harmonic(&synth(&on), true).unwrap();
        for k in 0..7 {
            let combined = w * fo.coefficients[k] + (1.0 - w) * fn_.coefficients[k];
            prop_assert!((fit.coefficients[k] - combined).abs() < 1e-10);
        }
    }

    #[test]
    fn bloch_action_composes(
        v1 in prop::array::uniform3(-3.0..3.0f64),
        v2 in prop::array::uniform3(-3.0..3.0f64),
        b in prop::array::uniform3(-0.57..0.57f64),
    ) {
        let u1 = AxisAngle::from_rotation_vector(v1).to_matrix();
        let u2 = AxisAngle::from_rotation_vector(v2).to_matrix();
        let s = BlochState::new(b).unwrap();
        let once = bloch_apply(&(u2 * u1), &s).bloch();
        let twice = bloch_apply(&u2, &bloch_apply(&u1, &s)).bloch();
        for k in 0..3 {
            prop_assert!((once[k] - twice[k]).abs() < 1e-12);
        }
        prop_assert!((bloch_apply(&u1, &s).polarization() - s.polarization()).abs() < 1e-12);
    }
}

#[test]
fn poisson_draws_have_poisson_moments() {
    for mean in [0.7, 12.0, 2000.0] {
        let n = 20_000;
        let xs: Vec<f64> = (0..n)
            .map(|i| sample_poisson(&mut point_rng(99, i, Channel::Off), mean))
            .collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        // 5σ bounds on the sample mean and variance
        let se_mean = (mean / n as f64).sqrt();
        let se_var = ((mean + 2.0 * mean * mean) / n as f64).sqrt();
        assert!((m - mean).abs() < 5.0 * se_mean, "mean {m} vs {mean}");
        assert!((v - mean).abs() < 5.0 * se_var, "variance {v} vs {mean}");
    }
}
