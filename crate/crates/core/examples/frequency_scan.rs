//! Scan an oversampled frequency grid around a pulsar and report the peak.

use photon_score::prelude::*;
use photon_score::scan::{scan, ScanSpec};

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
    let f0 = 1.002_53;
    let span = 1000.0;
    let model = RateModel::new(
        10.0,
        0.3,
        Sensitivity::default(),
        LightCurveProfile::sinusoid(0.5, 1.0)?,
        PhaseModel::new(f0, 0.0, 0.0)?,
        span,
    )?;
    let events = simulate(&model, &densities, 0.0, 3)?;
    let wf = WeightFunction::optimal(0.3, densities)?;
    let w: Vec<f64> = events
        .iter()
        .map(|e| wf.weight(e.energy, e.angle))
        .collect::<photon_score::Result<_>>()?;

    let spec = ScanSpec::new(0.995, 1.005, 10.0, 1)?;
    let result = scan(&events, &w, &spec, &HarmonicTemplate::rayleigh(), 0.0, span)?;
    let s = result.summary();
    println!(
        "{} trials, best f = {:.6} Hz (true {f0}), offset {:.2} steps, p = {:.3e}",
        s.trials,
        s.best_f,
        (s.best_f - f0) / s.step,
        s.min_p_value
    );
    Ok(())
}
