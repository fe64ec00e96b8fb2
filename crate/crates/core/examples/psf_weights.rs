//! Closed-form PSF weights as a function of angular distance.

use photon_score::auxmodel::psf_gaussian_weight;
use photon_score::prelude::*;

fn main() -> photon_score::Result<()> {
    let sigma = 1.0;
    for xi in [0.01, 0.1, 1.0] {
        let beta = xi / (sigma * sigma);
        let geometry = DiskGeometry::new(
            10.0,
            beta / std::f64::consts::TAU,
            1.0,
            SigmaModel::constant(sigma),
        )?;
        let row: Vec<String> = [0.0, 1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&phi| {
                psf_gaussian_weight(1000.0, phi, &geometry, None).map(|w| format!("{w:.4}"))
            })
            .collect::<photon_score::Result<_>>()?;
        println!("xi = {xi:<5} w(0..4 sigma) = {}", row.join("  "));
    }
    Ok(())
}
