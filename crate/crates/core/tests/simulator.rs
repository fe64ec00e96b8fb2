mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use photon_score::cli::csvio::write_events_to;
use photon_score::cli::csvio::ColumnUnits;
use photon_score::event::Origin;
use photon_score::lightcurve::{LightCurveProfile, PhaseModel};
use photon_score::simulator::{derive_seed, expected_count, simulate, RateModel, Sensitivity};
use photon_score::stats::summarize;

fn chi2_sf(stat: f64, dof: usize) -> f64 {
    ChiSquared::new(dof as f64).unwrap().sf(stat)
}

fn phase_histogram(phases: impl Iterator<Item = f64>, bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    for x in phases {
        let k = ((x.rem_euclid(1.0)) * bins as f64) as usize;
        h[k.min(bins - 1)] += 1.0;
    }
    h
}

#[test]
fn mean_count_over_500_seeds() {
    let d = common::densities();
    let m = RateModel::new(
        100.0,
        0.3,
        Sensitivity::default(),
        LightCurveProfile::flat(),
        PhaseModel::new(1.0, 0.0, 0.0).unwrap(),
        50.0,
    )
    .unwrap();
    assert!((expected_count(&m) - 5000.0).abs() < 1e-8);
    let counts: Vec<f64> = (0..500)
        .map(|i| simulate(&m, &d, 0.0, derive_seed(1, i)).unwrap().len() as f64)
        .collect();
    let s = summarize(&counts);
    assert!(
        (s.mean - 5000.0).abs() < 3.0 * (5000.0f64 / 500.0).sqrt(),
        "mean {}",
        s.mean
    );
    // Poisson dispersion.
    assert!(
        (s.variance / 5000.0 - 1.0).abs() < 0.2,
        "var {}",
        s.variance
    );
}

#[test]
fn theta_zero_gives_uniform_background_phases() {
    let d = common::densities();
    let m = common::model(
        1000.0,
        0.0,
        LightCurveProfile::sinusoid(0.5, 1.0).unwrap(),
        100.0,
    );
    let events = simulate(&m, &d, 0.0, 2).unwrap();
    assert!(events.len() > 95_000);
    assert!(events.iter().all(|e| e.origin == Some(Origin::Background)));
    let bins = 64;
    let h = phase_histogram(events.iter().map(|e| m.phase.phase(e.time)), bins);
    let expect = events.len() as f64 / bins as f64;
    let stat: f64 = h.iter().map(|o| (o - expect).powi(2) / expect).sum();
    assert!(chi2_sf(stat, bins - 1) > 1e-3, "chi2 {stat}");
}

#[test]
fn pulsed_source_matches_profile_shape() {
    let d = common::densities();
    let tau = 0.2;
    let m = common::model(
        1000.0,
        1.0,
        LightCurveProfile::sinusoid(0.5, 1.0).unwrap(),
        100.0,
    );
    let events = simulate(&m, &d, tau, 3).unwrap();
    let n = events.len() as f64;
    let bins = 64;
    let h = phase_histogram(events.iter().map(|e| m.phase.phase(e.time)), bins);
    // Bin mass of 1 + cos(2 pi (x + tau)).
    let tau2 = std::f64::consts::TAU;
    let stat: f64 = h
        .iter()
        .enumerate()
        .map(|(k, o)| {
            let (a, b) = (k as f64 / bins as f64, (k + 1) as f64 / bins as f64);
            let p = (b - a) + ((tau2 * (b + tau)).sin() - (tau2 * (a + tau)).sin()) / tau2;
            let e = n * p;
            (o - e).powi(2) / e
        })
        .sum();
    assert!(chi2_sf(stat, bins - 1) > 1e-3, "chi2 {stat}");
}

/// Direct per-segment Poisson draw from exponential gaps.
fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    let mut t = 0.0;
    let mut k = 0;
    loop {
        t += -(1.0 - rng.random::<f64>()).ln();
        if t > mean {
            return k;
        }
        k += 1;
    }
}

#[test]
fn thinning_matches_direct_sampling_for_four_levels() {
    let d = common::densities();
    let span = 100.0;
    let edges = vec![25.0, 50.0, 75.0];
    let levels = vec![0.8, 2.0, 0.2, 4.0];
    let m = RateModel::new(
        1.0,
        0.4,
        Sensitivity::Steps {
            edges: edges.clone(),
            levels: levels.clone(),
        },
        LightCurveProfile::flat(),
        PhaseModel::new(1.0, 0.0, 0.0).unwrap(),
        span,
    )
    .unwrap();
    let reps = 2000;
    let mut bounds = vec![0.0];
    bounds.extend(&edges);
    bounds.push(span);
    let segment = |t: f64| edges.partition_point(|&e| e <= t);

    let mut thinned = vec![Vec::new(); 4];
    for i in 0..reps {
        let mut c = [0usize; 4];
        for e in simulate(&m, &d, 0.0, derive_seed(4, i)).unwrap() {
            c[segment(e.time)] += 1;
        }
        for k in 0..4 {
            thinned[k].push(c[k]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut direct = vec![Vec::new(); 4];
    for _ in 0..reps {
        for k in 0..4 {
            direct[k].push(poisson(&mut rng, levels[k] * (bounds[k + 1] - bounds[k])));
        }
    }

    // Two-sample chi-square on pooled count bins, summed over segments.
    let mut stat = 0.0;
    let mut dof = 0;
    for k in 0..4 {
        let max = *thinned[k].iter().chain(&direct[k]).max().unwrap();
        let mut a = vec![0.0; max + 1];
        let mut b = vec![0.0; max + 1];
        thinned[k].iter().for_each(|&c| a[c] += 1.0);
        direct[k].iter().for_each(|&c| b[c] += 1.0);
        let mut cells: Vec<(f64, f64)> = Vec::new();
        let (mut ca, mut cb) = (0.0, 0.0);
        for (x, y) in a.iter().zip(&b) {
            ca += x;
            cb += y;
            if ca + cb >= 20.0 {
                cells.push((ca, cb));
                ca = 0.0;
                cb = 0.0;
            }
        }
        if let Some(last) = cells.last_mut() {
            last.0 += ca;
            last.1 += cb;
        }
        for &(x, y) in &cells {
            let e = (x + y) / 2.0;
            stat += (x - e).powi(2) / e + (y - e).powi(2) / e;
        }
        dof += cells.len() - 1;
    }
    let p = chi2_sf(stat, dof);
    assert!(p > 1e-3, "chi2 {stat} on {dof} dof, p = {p}");
}

#[test]
fn auxiliary_data_independent_of_phase() {
    let d = common::densities();
    let m = common::model(
        1000.0,
        0.5,
        LightCurveProfile::sinusoid(0.5, 1.0).unwrap(),
        100.0,
    );
    let events = simulate(&m, &d, 0.0, 5).unwrap();
    let n = events.len() as f64;
    let corr = |x: &[f64], y: &[f64]| {
        let sx = summarize(x);
        let sy = summarize(y);
        x.iter()
            .zip(y)
            .map(|(a, b)| (a - sx.mean) * (b - sy.mean))
            .sum::<f64>()
            / ((n - 1.0) * (sx.variance * sy.variance).sqrt())
    };
    let phase: Vec<f64> = events
        .iter()
        .map(|e| m.phase.phase(e.time).rem_euclid(1.0))
        .collect();
    let energy: Vec<f64> = events.iter().map(|e| e.energy).collect();
    let angle: Vec<f64> = events.iter().map(|e| e.angle).collect();
    let bound = 3.0 / n.sqrt();
    assert!(corr(&phase, &energy).abs() < bound);
    assert!(corr(&phase, &angle).abs() < bound);
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let d = common::densities();
    let m = common::model(
        50.0,
        0.3,
        LightCurveProfile::sinusoid(0.3, 1.0).unwrap(),
        20.0,
    );
    let write = |seed| {
        let mut buf = Vec::new();
        let ev = simulate(&m, &d, 0.1, seed).unwrap();
        write_events_to(&mut buf, &ev, None, ColumnUnits::default()).unwrap();
        buf
    };
    assert_eq!(write(9), write(9));
    assert_ne!(write(9), write(10));
}
