//! Compare the information efficiency of unit, cut, PSF and optimal weights.

use photon_score::auxmodel::{optimal_efficiency, weight_efficiency, weight_moments, CutRegion};
use photon_score::prelude::*;

fn main() -> photon_score::Result<()> {
    let geometry = DiskGeometry::from_xi(1.0, 1.0, 0.1)?;
    let spectra = (
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
    );
    let densities = geometry.densities(spectra.0, spectra.1)?;
    for theta in [0.01, 0.1, 0.3] {
        println!("theta = {theta}");
        let weights = [
            ("unit", WeightFunction::Unit),
            ("cut 1 sigma", WeightFunction::Cut(CutRegion::angle(1.0)?)),
            ("cut 2 sigma", WeightFunction::Cut(CutRegion::angle(2.0)?)),
            (
                "psf, angle only",
                WeightFunction::PsfGaussian {
                    geometry,
                    spectra: None,
                },
            ),
            (
                "psf + spectra",
                WeightFunction::PsfGaussian {
                    geometry,
                    spectra: Some(spectra),
                },
            ),
            ("optimal", WeightFunction::optimal(theta, densities)?),
        ];
        for (name, wf) in &weights {
            let e = weight_efficiency(&weight_moments(wf, theta, &densities)?, theta)?;
            println!("  {name:>16}: {e:.4}");
        }
        println!(
            "  {:>16}: {:.4}",
            "bound",
            optimal_efficiency(theta, &densities)?
        );
    }
    Ok(())
}
