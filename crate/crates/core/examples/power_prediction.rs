//! Predicted signal-to-noise ratio and the detection threshold, checked
//! against a small simulation.

use photon_score::auxmodel::optimal_efficiency;
use photon_score::power::{empirical_snr, predicted_snr, threshold_theta};
use photon_score::prelude::*;

fn main() -> photon_score::Result<()> {
    let densities = DiskGeometry::from_xi(1.0, 1.0, 0.1)?.densities(
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
    let (theta, span, mu0) = (0.1, 1000.0, 10.0);
    let source = LightCurveProfile::sinusoid(0.5, 1.0)?;
    let template = HarmonicTemplate::rayleigh();
    let eff = optimal_efficiency(theta, &densities)?;
    let pred = predicted_snr(theta, span, mu0, eff, &template, &source)?;
    println!("efficiency {eff:.4}, predicted SNR {:.3}", pred.snr);
    println!(
        "theta for SNR 5: {:.4}",
        threshold_theta(span, mu0, eff, &template, &source, 5.0)?
    );

    let phase = PhaseModel::new(1.0, 0.0, 0.0)?;
    let run = |profile: LightCurveProfile, seed| -> photon_score::Result<Vec<f64>> {
        let setup = MonteCarloSetup {
            rate: RateModel::new(mu0, theta, Sensitivity::default(), profile, phase, span)?,
            densities,
            weights: vec![WeightFunction::optimal(theta, densities)?],
            templates: vec![template.clone()],
            detect_phase: None,
        };
        Ok(qt_column(&setup.run(400, seed)?, 0, 0))
    };
    let null = run(LightCurveProfile::flat(), 1)?;
    let alt = run(source.clone(), 2)?;
    let e = empirical_snr(&null, &alt);
    println!("empirical SNR {:.3} +/- {:.3}", e.snr, e.stderr);
    Ok(())
}
