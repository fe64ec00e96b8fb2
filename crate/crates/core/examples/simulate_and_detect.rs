//! Simulate a weak pulsed source on a background disc and run the detector.

use photon_score::prelude::*;

fn main() -> photon_score::Result<()> {
    let geometry = DiskGeometry::from_xi(1.0, 1.0, 0.1)?;
    let densities = geometry.densities(
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
        10.0,
        0.1,
        Sensitivity::default(),
        LightCurveProfile::sinusoid(0.5, 1.0)?,
        PhaseModel::new(1.0, 0.0, 0.0)?,
        2000.0,
    )?;
    let events = simulate(&model, &densities, 0.0, 7)?;
    println!("{} events", events.len());

    let template = HarmonicTemplate::rayleigh();
    for (name, wf) in [
        ("unit", WeightFunction::Unit),
        ("optimal", WeightFunction::optimal(0.1, densities)?),
    ] {
        let r = detect(
            &events,
            &wf,
            &model.phase,
            &template,
            None,
            &densities,
            model.span,
        )?;
        println!(
            "{name:>8}: Q_T = {:.4}  p = {:.3e}  theta used = {:?}",
            r.qt, r.p_value, r.theta_used
        );
    }
    Ok(())
}
