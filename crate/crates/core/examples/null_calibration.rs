//! Check the null distribution of Q_T against its weighted chi-square law.

use photon_score::detector::null_moments;
use photon_score::prelude::*;
use photon_score::stats::{ks_uniform, summarize};

fn main() -> photon_score::Result<()> {
    let densities = DiskGeometry::from_xi(1.0, 1.0, 0.3)?.densities(
        EnergySpectrum::PowerLaw {
            index: 2.0,
            e_min: 100.0,
            e_max: 10_000.0,
        },
        EnergySpectrum::PowerLaw {
            index: 2.7,
            e_min: 100.0,
            e_max: 10_000.0,
        },
    )?;
    let model = RateModel::new(
        5.0,
        0.3,
        Sensitivity::default(),
        LightCurveProfile::flat(),
        PhaseModel::new(1.0, 0.0, 0.0)?,
        1000.0,
    )?;
    let setup = MonteCarloSetup {
        rate: model,
        densities,
        weights: vec![WeightFunction::optimal(0.3, densities)?],
        templates: vec![HarmonicTemplate::z_m(3)?],
        detect_phase: None,
    };
    let reps = setup.run(500, 11)?;
    let qt = qt_column(&reps, 0, 0);
    let p: Vec<f64> = reps.iter().map(|r| r.results[0][0].p_value).collect();
    let s2 = summarize(
        &reps
            .iter()
            .map(|r| r.results[0][0].sum_w2)
            .collect::<Vec<_>>(),
    )
    .mean;
    let (mean, var) = null_moments(s2, &setup.templates[0], setup.rate.span);
    let q = summarize(&qt);
    println!("mean Q_T {:.5} (predicted {mean:.5})", q.mean);
    println!("var  Q_T {:.3e} (predicted {var:.3e})", q.variance);
    println!("p-value uniformity: {:?}", ks_uniform(&p));
    Ok(())
}
