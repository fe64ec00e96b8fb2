mod common;

use proptest::prelude::*;

use photon_score::auxmodel::{
    correlation_efficiency, optimal_efficiency, weight_efficiency, weight_moments, DiskGeometry,
    PiecewiseWeight, WeightFunction,
};
use photon_score::lightcurve::{
    spectrum_efficiency, template_efficiency, HarmonicTemplate, LightCurveProfile,
};
use photon_score::power::zm_efficiency_table;

fn efficiency(w: &WeightFunction, theta: f64) -> f64 {
    let d = common::densities();
    weight_efficiency(&weight_moments(w, theta, &d).unwrap(), theta).unwrap()
}

fn piecewise(values: Vec<f64>) -> WeightFunction {
    let r = common::geometry().radius;
    WeightFunction::Piecewise(
        PiecewiseWeight::new(
            vec![100.0, 700.0, 10_000.0],
            vec![0.0, 0.8, 1.7, 2.9, r],
            values,
        )
        .unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn piecewise_efficiency_identity_and_bound(
        values in prop::collection::vec(0.0..1.0f64, 8),
        theta in 0.05..0.5f64,
    ) {
        prop_assume!(values.iter().any(|v| *v > 0.05));
        let d = common::densities();
        let w = piecewise(values);
        let direct = efficiency(&w, theta);
        let corr = correlation_efficiency(&w, theta, &d).unwrap();
        prop_assert!((direct - corr).abs() <= 1e-5 * direct);
        let best = optimal_efficiency(theta, &d).unwrap();
        prop_assert!(best >= direct * (1.0 - 1e-5));
    }

    #[test]
    fn psf_family_is_dominated_by_the_optimal_weight(
        xi in 0.05..5.0f64,
        theta in 0.05..0.5f64,
        use_spectra in any::<bool>(),
    ) {
        let d = common::densities();
        let g = common::geometry();
        let geometry = DiskGeometry::new(g.radius, xi * g.alpha_rate / std::f64::consts::TAU, g.alpha_rate, g.psf).unwrap();
        let spectra = use_spectra.then_some((common::SOURCE_SPECTRUM, common::BACKGROUND_SPECTRUM));
        let w = WeightFunction::PsfGaussian { geometry, spectra };
        let e = efficiency(&w, theta);
        prop_assert!(optimal_efficiency(theta, &d).unwrap() >= e * (1.0 - 1e-5));
    }

    #[test]
    fn efficiency_is_scale_invariant(c in 0.01..100.0f64) {
        let w = piecewise(vec![0.1, 0.9, 0.3, 0.0, 0.5, 0.2, 0.7, 0.4]);
        let a = efficiency(&w, 0.2);
        let b = efficiency(&w.clone().scaled(c), 0.2);
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }
}

proptest! {
    #[test]
    fn template_efficiency_at_most_one(
        t in prop::collection::vec(0.0..1.0f64, 1..10),
        s in prop::collection::vec(0.0..1.0f64, 1..10),
    ) {
        prop_assume!(t.iter().any(|x| *x > 1e-3) && s.iter().any(|x| *x > 1e-3));
        let e = spectrum_efficiency(&t, &s).unwrap();
        prop_assert!(e <= 1.0 + 1e-12);
        prop_assert!((spectrum_efficiency(&s, &s).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn optimal_weight_routes_agree_on_the_disc() {
    let d = common::densities();
    for theta in [0.05, 0.1, 0.3] {
        let w = WeightFunction::optimal(theta, d).unwrap();
        let a = efficiency(&w, theta);
        let b = optimal_efficiency(theta, &d).unwrap();
        let c = correlation_efficiency(&w, theta, &d).unwrap();
        assert!((a - b).abs() < 1e-6 * b, "{a} vs {b}");
        assert!((c - b).abs() < 1e-5 * b, "{c} vs {b}");
    }
}

#[test]
fn average_template_coefficients() {
    let avg = [0.35, 0.77, 0.43, 0.17, 0.26];
    let t = HarmonicTemplate::new(avg.to_vec()).unwrap();
    let coeffs = avg
        .iter()
        .map(|g: &f64| num_complex::Complex64::new(g.sqrt(), 0.0))
        .collect();
    let source = LightCurveProfile::new(coeffs, 0.1).unwrap();
    assert!((template_efficiency(&t, &source).unwrap() - 1.0).abs() < 1e-12);

    let table = zm_efficiency_table(&source, 10).unwrap();
    let peak = table
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .unwrap()
        .0;
    assert!(peak > 0 && peak < table.len() - 1, "{table:?}");
    assert!(table[..=peak].windows(2).all(|w| w[1].1 >= w[0].1));
    // Beyond the source's highest harmonic each extra term only adds noise.
    assert!(table[avg.len() - 1..].windows(2).all(|w| w[1].1 < w[0].1));
}
