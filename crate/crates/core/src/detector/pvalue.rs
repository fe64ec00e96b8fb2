//! Tail probabilities of weighted sums of independent chi-square(2) variables.
//!
//! Three routes are used, in order of preference:
//! closed forms (single weight, or all weights equal), Imhof's inversion of
//! the characteristic function, and, when Imhof's oscillatory integral
//! would be too long, the exact hypoexponential tail by uniformization of
//! the phase-type generator.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::lightcurve::HarmonicTemplate;
use crate::quadrature::gauss_legendre;

/// Truncation error allowed in the Imhof integral.
const IMHOF_TRUNCATION: f64 = 1e-10;
/// Panel budget before switching to the uniformization route.
const IMHOF_MAX_PANELS: usize = 40_000;
/// Relative spread below which weights count as equal.
const EQUAL_WEIGHTS_RTOL: f64 = 1e-12;

/// p-value of `Q_T` under the null hypothesis of no periodicity.
///
/// `Q_T * T / sum_w2` is modelled as `sum_n |a_n|^2 X_n`, with `X_n`
/// independent chi-square(2), since `2|A_n|^2 / sum_w2` is approximately
/// chi-square(2) and `Q_T` counts each harmonic twice (`n` and `-n`).
pub fn p_value(qt: f64, sum_w2: f64, template: &HarmonicTemplate, span: f64) -> Result<f64> {
    if !(sum_w2 > 0.0) {
        return Err(invalid("sum_w2", format!("must be > 0, got {sum_w2}")));
    }
    if !(span > 0.0) {
        return Err(invalid("span", format!("must be > 0, got {span}")));
    }
    if qt.is_nan() {
        return Err(invalid("qt", "statistic is NaN"));
    }
    let weights: Vec<f64> = template
        .amps_sq()
        .iter()
        .copied()
        .filter(|&a| a > 0.0)
        .collect();
    if weights.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    Ok(weighted_chi2_sf(&weights, qt * span / sum_w2))
}

/// `P(sum_k w_k X_k > x)` with `X_k ~ chi-square(2)` and `w_k > 0`.
pub fn weighted_chi2_sf(weights: &[f64], x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let max = weights.iter().copied().fold(0.0, f64::max);
    let min = weights.iter().copied().fold(f64::INFINITY, f64::min);
    if weights.len() == 1 || (max - min) <= EQUAL_WEIGHTS_RTOL * max {
        return chi2_even_sf(2 * weights.len(), x / max);
    }
    let p = imhof_sf(weights, x).unwrap_or_else(|| phase_type_sf(weights, x));
    p.clamp(0.0, 1.0)
}

/// Survival function of chi-square with an even number of degrees of freedom.
pub fn chi2_even_sf(dof: usize, x: f64) -> f64 {
    debug_assert!(dof.is_multiple_of(2) && dof > 0);
    if x <= 0.0 {
        return 1.0;
    }
    let half = 0.5 * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..dof / 2 {
        term *= half / j as f64;
        sum += term;
    }
    (-half).exp() * sum
}

/// Imhof's integral for chi-square(2) components; `None` when the
/// integration range would exceed the panel budget.
pub fn imhof_sf(weights: &[f64], x: f64) -> Option<f64> {
    let scale = weights.iter().copied().fold(0.0, f64::max);
    let lam: Vec<f64> = weights.iter().map(|w| w / scale).collect();
    let x = x / scale;
    let m = lam.len() as f64;
    let prod: f64 = lam.iter().product();
    // int_U^inf du / (u rho(u)) <= 1 / (m U^m prod lam)
    let upper = (1.0 / (PI * m * prod * IMHOF_TRUNCATION)).powf(1.0 / m);
    let speed = lam.iter().sum::<f64>() + 0.5 * x;
    let width = (0.5 * PI / speed).min(0.5);
    let panels = (upper / width).ceil();
    if !panels.is_finite() || panels as usize > IMHOF_MAX_PANELS {
        return None;
    }
    let integrand = |u: f64| {
        if u == 0.0 {
            return lam.iter().sum::<f64>() - 0.5 * x;
        }
        let mut theta = -0.5 * x * u;
        let mut log_rho = 0.0;
        for &l in &lam {
            theta += (l * u).atan();
            log_rho += 0.5 * (l * u).mul_add(l * u, 1.0).ln();
        }
        theta.sin() / (u * log_rho.exp())
    };
    let n = panels as usize;
    let mut total = 0.0;
    for k in 0..n {
        let a = k as f64 * width;
        total += gauss_legendre(integrand, a, a + width);
    }
    Some(0.5 + total / PI)
}

/// Exact tail of the hypoexponential law `sum_k w_k X_k` by uniformization.
///
/// Each `w_k X_k` is exponential with rate `1 / (2 w_k)`; the sum is the
/// absorption time of a pure-birth chain. With `q` the largest rate and
/// `P = I + S / q`, `P(Y > x) = sum_j Pois(j; q x) e_1' P^j 1`. All terms
/// are nonnegative, so there is no cancellation.
pub fn phase_type_sf(weights: &[f64], x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let rates: Vec<f64> = weights.iter().map(|w| 0.5 / w).collect();
    let k = rates.len();
    let q = rates.iter().copied().fold(0.0, f64::max);
    let qx = q * x;
    // v = P^j 1, P upper bidiagonal: stay 1 - r_i/q, advance r_i/q.
    let stay: Vec<f64> = rates.iter().map(|r| 1.0 - r / q).collect();
    let advance: Vec<f64> = rates.iter().map(|r| r / q).collect();
    let mut v = vec![1.0; k];
    let mut next = vec![0.0; k];
    let mut log_pmf = -qx;
    let mut total = 0.0;
    let mut j: u64 = 0;
    loop {
        let term = log_pmf.exp() * v[0];
        total += term;
        if j as f64 > qx {
            // Poisson tail beyond j bounded by a geometric series.
            let ratio = qx / (j as f64 + 1.0);
            let tail = log_pmf.exp() * ratio / (1.0 - ratio);
            if tail <= 1e-17 * total || tail < 1e-300 {
                break;
            }
        }
        for i in 0..k {
            let forward = if i + 1 < k {
                advance[i] * v[i + 1]
            } else {
                0.0
            };
            next[i] = stay[i] * v[i] + forward;
        }
        std::mem::swap(&mut v, &mut next);
        j += 1;
        log_pmf += qx.ln() - (j as f64).ln();
        if j > 50_000_000 {
            break;
        }
    }
    total.clamp(0.0, 1.0)
}
