mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use photon_score::auxmodel::WeightFunction;
use photon_score::detector::{
    detect, detect_weighted, estimate_theta, fourier_coefficients, qt_statistic, score_at_tau,
    theta_standard_error,
};
use photon_score::event::Event;
use photon_score::lightcurve::{
    estimate_profile_coeffs, HarmonicTemplate, LightCurveProfile, PhaseModel,
};
use photon_score::scan::{scan, ScanSpec};
use photon_score::simulator::{derive_seed, simulate};
use photon_score::stats::ks_test;

fn events_strategy() -> impl Strategy<Value = (Vec<Event>, Vec<f64>)> {
    prop::collection::vec((0.0..500.0f64, 0.0..1.0f64), 1..80).prop_map(|v| {
        let events = v.iter().map(|&(t, _)| Event::new(t, 1.0, 0.0)).collect();
        let weights = v.iter().map(|&(_, w)| w + 0.01).collect();
        (events, weights)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qt_invariant_under_time_translation(
        (events, weights) in events_strategy(),
        f in 0.05..5.0f64,
        fdot in -1e-5..1e-5f64,
        shift in -1e3..1e3f64,
        m in 1usize..6,
    ) {
        let span = 500.0;
        let template = HarmonicTemplate::z_m(m).unwrap();
        let model = PhaseModel::new(f, fdot, 17.0).unwrap();
        let moved: Vec<Event> = events
            .iter()
            .map(|e| Event::new(e.time + shift, e.energy, e.angle))
            .collect();
        let moved_model = PhaseModel::new(f, fdot, 17.0 + shift).unwrap();
        let a = detect_weighted(&events, &weights, &model, &template, span, None).unwrap();
        let b = detect_weighted(&moved, &weights, &moved_model, &template, span, None).unwrap();
        prop_assert!((a.qt - b.qt).abs() <= 1e-9 * a.qt.max(1e-300));
    }

    #[test]
    fn weight_scaling_leaves_p_value_unchanged(
        (events, weights) in events_strategy(),
        c in 0.01..100.0f64,
        f in 0.05..5.0f64,
    ) {
        let span = 500.0;
        let template = HarmonicTemplate::new(vec![1.0, 0.5, 0.25]).unwrap();
        let model = PhaseModel::new(f, 0.0, 0.0).unwrap();
        let scaled: Vec<f64> = weights.iter().map(|w| c * w).collect();
        let a = detect_weighted(&events, &weights, &model, &template, span, None).unwrap();
        let b = detect_weighted(&events, &scaled, &model, &template, span, None).unwrap();
        prop_assert!((b.qt - c * c * a.qt).abs() <= 1e-9 * b.qt.max(1e-300));
        prop_assert!((a.p_value - b.p_value).abs() <= 1e-10);
    }

    #[test]
    fn parseval_reduction(
        (events, weights) in events_strategy(),
        g in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..5),
        f in 0.05..5.0f64,
    ) {
        let coeffs: Vec<Complex64> = g.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let l1: f64 = coeffs.iter().map(|c| c.norm()).sum();
        prop_assume!(l1 > 1e-3);
        let profile = LightCurveProfile::new(coeffs, 0.4 / l1).unwrap();
        let model = PhaseModel::new(f, 0.0, 0.0).unwrap();
        let nodes = 1024;
        let integral: f64 = (0..nodes)
            .map(|k| {
                score_at_tau(&events, &weights, &model, &profile, k as f64 / nodes as f64)
                    .unwrap()
                    .powi(2)
            })
            .sum::<f64>()
            / nodes as f64;
        let an = fourier_coefficients(&events, &weights, &model, profile.m()).unwrap();
        let harmonic: f64 = 2.0 * profile
            .pulsed_spectrum()
            .iter()
            .zip(&an)
            .map(|(p, a)| p * a.norm_sqr())
            .sum::<f64>();
        prop_assert!((integral - harmonic).abs() <= 1e-9 * harmonic.max(1e-12));
    }
}

#[test]
fn qt_matches_explicit_sum_over_both_signs() {
    let events: Vec<Event> = (0..40)
        .map(|k| Event::new(k as f64 * 1.37 % 50.0, 1.0, 0.0))
        .collect();
    let w = vec![1.0; 40];
    let model = PhaseModel::new(0.71, 0.0, 0.0).unwrap();
    let template = HarmonicTemplate::new(vec![0.3, 0.7]).unwrap();
    let an = fourier_coefficients(&events, &w, &model, 2).unwrap();
    let qt = qt_statistic(&an, &template, 50.0).unwrap();
    let mut direct = 0.0;
    for n in [-2i64, -1, 1, 2] {
        let a = photon_score::detector::fourier_coefficient_at(&events, &w, &model, n).unwrap();
        direct += template.amps_sq()[n.unsigned_abs() as usize - 1] * a.norm_sqr();
    }
    assert!((qt - direct / 50.0).abs() < 1e-12 * qt);
}

#[test]
fn strong_source_is_detected() {
    let d = common::densities();
    let model = common::model(
        10.0,
        0.3,
        LightCurveProfile::sinusoid(0.5, 1.0).unwrap(),
        1000.0,
    );
    let wf = WeightFunction::optimal(0.3, d).unwrap();
    let template = HarmonicTemplate::rayleigh();
    let detected = (0..100)
        .filter(|&i| {
            let events = simulate(&model, &d, 0.0, derive_seed(21, i)).unwrap();
            let r = detect(&events, &wf, &model.phase, &template, None, &d, 1000.0).unwrap();
            r.p_value < 1e-6
        })
        .count();
    assert!(detected >= 99, "detected {detected} of 100");
}

#[test]
fn theta_estimate_from_simulated_aux_data() {
    let d = common::densities();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let z: Vec<(f64, f64)> = (0..100_000)
        .map(|_| {
            if rng.random::<f64>() < 0.3 {
                d.source.sample(&mut rng)
            } else {
                d.background.sample(&mut rng)
            }
        })
        .collect();
    let hat = estimate_theta(&z, &d).unwrap();
    let se = theta_standard_error(hat, z.len(), &d).unwrap();
    assert!((0.28..=0.32).contains(&hat), "theta_hat {hat}");
    assert!((hat - 0.3).abs() < 3.0 * se, "theta_hat {hat}, se {se}");
}

#[test]
fn profile_recovered_from_simulated_events() {
    let d = common::densities();
    let model = common::model(
        1000.0,
        1.0,
        LightCurveProfile::sinusoid(0.5, 1.0).unwrap(),
        100.0,
    );
    let events = simulate(&model, &d, 0.0, 23).unwrap();
    assert!(events.len() > 95_000);
    let est = estimate_profile_coeffs(&events, &model.phase, 3, None).unwrap();
    let p = est.power_spectrum();
    let total: f64 = p.iter().sum();
    assert!(p[0] / total >= 0.95, "{p:?}");
}

#[test]
fn null_scan_minimum_p_is_beta_distributed() {
    let d = common::densities();
    let span = 1000.0;
    let model = common::model(1.0, 0.3, LightCurveProfile::flat(), span);
    let grid = 256;
    // oversample 1 puts the points on independent Fourier frequencies.
    let spec = ScanSpec::new(1.0, 1.0 + (grid - 1) as f64 / span, 1.0, 1).unwrap();
    assert_eq!(spec.frequency_count(span), grid);
    let template = HarmonicTemplate::rayleigh();
    let min_p: Vec<f64> = (0..200)
        .map(|i| {
            let events = simulate(&model, &d, 0.0, derive_seed(24, i)).unwrap();
            let w = vec![1.0; events.len()];
            scan(&events, &w, &spec, &template, 0.0, span)
                .unwrap()
                .best_point()
                .p_value
        })
        .collect();
    let g = grid as f64;
    let ks = ks_test(&min_p, |x| 1.0 - (1.0 - x.clamp(0.0, 1.0)).powf(g));
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn cut_excluding_everything_is_an_error() {
    let d = common::densities();
    let model = common::model(5.0, 0.3, LightCurveProfile::flat(), 100.0);
    let events = simulate(&model, &d, 0.0, 25).unwrap();
    let cut = WeightFunction::Cut(photon_score::auxmodel::CutRegion::new(1e9, 2e9, 1.0).unwrap());
    let err = detect(
        &events,
        &cut,
        &model.phase,
        &HarmonicTemplate::rayleigh(),
        Some(0.3),
        &d,
        100.0,
    )
    .unwrap_err();
    assert!(err.to_string().contains("no weighted events"), "{err}");
}
