//! Estimate the source fraction from auxiliary data alone.

use photon_score::detector::{estimate_theta, theta_standard_error};
use photon_score::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (theta, n) in [(0.05, 10_000), (0.3, 10_000), (0.3, 100_000)] {
        let z: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                if rng.random::<f64>() < theta {
                    densities.source.sample(&mut rng)
                } else {
                    densities.background.sample(&mut rng)
                }
            })
            .collect();
        let hat = estimate_theta(&z, &densities)?;
        let se = theta_standard_error(hat, n, &densities)?;
        println!("theta = {theta}, N = {n}: estimate {hat:.4} +/- {se:.4}");
    }
    Ok(())
}
