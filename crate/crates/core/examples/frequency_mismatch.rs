//! Power lost to a frequency offset, per harmonic, with and without a
//! matching frequency-derivative error.

use photon_score::power::{
    mismatch_curve, mismatch_factor, MismatchMode, MismatchSetup, MismatchVia,
};
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
    let profile = LightCurveProfile::new(vec![Complex64::new(0.2, 0.0); 5], 1.0)?;
    let model = RateModel::new(
        10.0,
        1.0,
        Sensitivity::default(),
        profile,
        PhaseModel::new(100.0, 0.0, 0.0)?,
        1000.0,
    )?;
    let setup = MismatchSetup {
        model,
        densities,
        weight: WeightFunction::Unit,
        replicates: 200,
        seed: 5,
    };
    for mode in [MismatchMode::FOnly, MismatchMode::FAndFdot] {
        println!("{mode:?}");
        for p in mismatch_curve(&setup, &[1, 3, 5], &[0.1, 0.3], mode)? {
            println!(
                "  n = {} Delta = {:+.1}: {:.3} +/- {:.3}",
                p.n, p.delta, p.factor, p.mc_stderr
            );
        }
    }
    let fit = mismatch_factor(
        2,
        0.1,
        MismatchMode::FOnly,
        MismatchVia::QuadraticFit,
        &setup,
    )?;
    println!(
        "quadratic fit at n = 2: factor {:.3}, kappa {:?}",
        fit.factor, fit.kappa
    );
    Ok(())
}
