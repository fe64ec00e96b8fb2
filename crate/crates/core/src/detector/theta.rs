//! Maximum-likelihood estimate of the source fraction from auxiliary data.

use crate::auxmodel::{fisher_information, AuxDensityPair};
use crate::error::{invalid, Error, Result};

const GOLDEN_TOL: f64 = 1e-8;

/// `argmax_theta sum_j log[(1 - theta) f_B(z_j) + theta f_S(z_j)]` on `[0, 1]`.
///
/// The log-likelihood is concave, so boundary maxima are read off the
/// one-sided derivatives and interior maxima found by golden-section search.
pub fn estimate_theta(z: &[(f64, f64)], densities: &AuxDensityPair) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::EmptyEvents);
    }
    let mut pairs = Vec::with_capacity(z.len());
    for &(e, phi) in z {
        let (fs, fb) = densities.pdfs_for_ratio(e, phi);
        if !(fs.is_finite() && fb.is_finite()) {
            return Err(invalid("z", format!("non-finite density at ({e}, {phi})")));
        }
        if fs == 0.0 && fb == 0.0 {
            return Err(Error::OutsideSupport);
        }
        pairs.push((fs, fb));
    }
    theta_from_densities(&pairs)
}

/// [`estimate_theta`] on precomputed `(f_S, f_B)` pairs.
pub fn theta_from_densities(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.iter().all(|&(fs, fb)| fs == fb) {
        return Err(Error::ThetaNotIdentifiable);
    }
    let slope = |theta: f64| -> f64 {
        pairs
            .iter()
            .map(|&(fs, fb)| {
                let m = (1.0 - theta) * fb + theta * fs;
                if m == 0.0 {
                    // Only reachable at a boundary where this point forces
                    // the estimate away from it.
                    if fs > fb {
                        f64::INFINITY
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    (fs - fb) / m
                }
            })
            .sum()
    };
    if slope(0.0) <= 0.0 {
        return Ok(0.0);
    }
    if slope(1.0) >= 0.0 {
        return Ok(1.0);
    }
    let loglik = |theta: f64| -> f64 {
        pairs
            .iter()
            .map(|&(fs, fb)| ((1.0 - theta) * fb + theta * fs).ln())
            .sum()
    };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (loglik(c), loglik(d));
    while b - a > GOLDEN_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = loglik(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = loglik(d);
        }
    }
    Ok(0.5 * (a + b))
}

/// Asymptotic standard error `1 / sqrt(N I(theta))` from the expected
/// Fisher information.
pub fn theta_standard_error(theta: f64, n: usize, densities: &AuxDensityPair) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyEvents);
    }
    let info = fisher_information(theta, densities)?;
    if !(info > 0.0) {
        return Err(Error::ThetaNotIdentifiable);
    }
    Ok(1.0 / (n as f64 * info).sqrt())
}
