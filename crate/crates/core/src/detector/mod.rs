//! Weighted Fourier coefficients, the phase-invariant statistic `Q_T`, the
//! phase-dependent score, and their null calibration.

mod pvalue;
mod theta;

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::auxmodel::{AuxDensityPair, WeightFunction};
use crate::error::{invalid, Error, Result};
use crate::event::Event;
use crate::lightcurve::{HarmonicTemplate, LightCurveProfile, PhaseModel};
use crate::summation::{CompensatedSum, ComplexSum};

pub use pvalue::{chi2_even_sf, imhof_sf, p_value, phase_type_sf, weighted_chi2_sf};
pub use theta::{estimate_theta, theta_from_densities, theta_standard_error};

/// Below this many cycles over the span the dropped deterministic term of
/// the score is not negligible.
pub const MIN_CYCLES: f64 = 100.0;

fn check_weights(events: &[Event], weights: &[f64]) -> Result<()> {
    if events.len() != weights.len() {
        return Err(Error::LengthMismatch {
            events: events.len(),
            weights: weights.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(invalid(
            "weights",
            format!("must be finite and >= 0, got {w}"),
        ));
    }
    Ok(())
}

#[inline]
fn unit_phasor(cycles: f64) -> Complex64 {
    let (s, c) = (TAU * cycles.rem_euclid(1.0)).sin_cos();
    Complex64::new(c, s)
}

/// `A_n = sum_j w_j exp(2 pi i n phi(t_j))` for `n = 1..=m`.
pub fn fourier_coefficients(
    events: &[Event],
    weights: &[f64],
    model: &PhaseModel,
    m: usize,
) -> Result<Vec<Complex64>> {
    check_weights(events, weights)?;
    if m == 0 {
        return Err(invalid("m", "need at least one harmonic"));
    }
    let mut sums = vec![ComplexSum::default(); m];
    let mut powers = vec![Complex64::new(0.0, 0.0); m];
    for (ev, &w) in events.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let base = unit_phasor(model.phase(ev.time));
        powers[0] = base;
        for n in 1..m {
            powers[n] = powers[n - 1] * base;
        }
        for (s, p) in sums.iter_mut().zip(&powers) {
            s.add(w * p);
        }
    }
    Ok(sums.iter().map(ComplexSum::value).collect())
}

/// A single coefficient `A_n` for any integer `n`, computed directly.
pub fn fourier_coefficient_at(
    events: &[Event],
    weights: &[f64],
    model: &PhaseModel,
    n: i64,
) -> Result<Complex64> {
    check_weights(events, weights)?;
    let mut sum = ComplexSum::default();
    for (ev, &w) in events.iter().zip(weights) {
        let x = (n as f64 * model.phase(ev.time).rem_euclid(1.0)).rem_euclid(1.0);
        sum.add(w * unit_phasor(x));
    }
    Ok(sum.value())
}

/// `Q_T = (2 / T) sum_{n=1..m} |alpha_n|^2 |A_n|^2`.
pub fn qt_statistic(an: &[Complex64], template: &HarmonicTemplate, span: f64) -> Result<f64> {
    if !(span > 0.0) {
        return Err(invalid("span", format!("must be > 0, got {span}")));
    }
    if template.m() > an.len() {
        return Err(invalid(
            "template",
            format!(
                "uses {} harmonics but only {} coefficients given",
                template.m(),
                an.len()
            ),
        ));
    }
    let mut sum = CompensatedSum::default();
    for (a, z) in template.amps_sq().iter().zip(an) {
        sum.add(a * z.norm_sqr());
    }
    Ok(2.0 * sum.value() / span)
}

/// Phase-dependent score `S(tau) = sum_j w_j (nu_tau(phi(t_j)) - 1)`.
pub fn score_at_tau(
    events: &[Event],
    weights: &[f64],
    model: &PhaseModel,
    profile: &LightCurveProfile,
    tau: f64,
) -> Result<f64> {
    check_weights(events, weights)?;
    if profile.eta() == 0.0 {
        return Ok(0.0);
    }
    let mut sum = CompensatedSum::default();
    for (ev, &w) in events.iter().zip(weights) {
        if w != 0.0 {
            let x = (model.phase(ev.time) + tau).rem_euclid(1.0);
            sum.add(w * (profile.eval(x) - 1.0));
        }
    }
    Ok(sum.value())
}

/// Outcome of one detection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub qt: f64,
    /// `|A_n|^2` for `n = 1..=m`.
    pub an_sq: Vec<f64>,
    pub sum_w2: f64,
    pub p_value: f64,
    /// Source fraction used to build the weights; `None` for weights
    /// supplied directly.
    pub theta_used: Option<f64>,
    pub n_events: usize,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

/// Detection with weights evaluated from `weight_fn`.
///
/// When `theta` is `None` it is estimated from the events' auxiliary data
/// and substituted into the weight.
pub fn detect(
    events: &[Event],
    weight_fn: &WeightFunction,
    model: &PhaseModel,
    template: &HarmonicTemplate,
    theta: Option<f64>,
    densities: &AuxDensityPair,
    span: f64,
) -> Result<DetectionResult> {
    if events.is_empty() {
        return Err(Error::EmptyEvents);
    }
    let theta = match theta {
        Some(t) => {
            if !(0.0..=1.0).contains(&t) {
                return Err(invalid("theta", format!("must be in [0, 1], got {t}")));
            }
            t
        }
        None => {
            let z: Vec<(f64, f64)> = events.iter().map(|e| (e.energy, e.angle)).collect();
            estimate_theta(&z, densities)?
        }
    };
    let w = if weight_fn.uses_theta() {
        weight_fn.with_theta(theta)?
    } else {
        weight_fn.clone()
    };
    let weights = events
        .iter()
        .map(|e| w.weight(e.energy, e.angle))
        .collect::<Result<Vec<f64>>>()?;
    detect_weighted(events, &weights, model, template, span, Some(theta))
}

/// Detection with per-event weights given directly.
pub fn detect_weighted(
    events: &[Event],
    weights: &[f64],
    model: &PhaseModel,
    template: &HarmonicTemplate,
    span: f64,
    theta_used: Option<f64>,
) -> Result<DetectionResult> {
    if events.is_empty() {
        return Err(Error::EmptyEvents);
    }
    check_weights(events, weights)?;
    let sum_w2 = weights.iter().map(|w| w * w).sum::<f64>();
    if sum_w2 == 0.0 {
        return Err(Error::NoWeightedEvents);
    }
    let an = fourier_coefficients(events, weights, model, template.m())?;
    let qt = qt_statistic(&an, template, span)?;
    let p = p_value(qt, sum_w2, template, span)?;
    let mut warnings = Vec::new();
    let cycles = model.f * span;
    if cycles < MIN_CYCLES {
        warnings.push(format!(
            "only {cycles:.1} cycles over the span; the score's deterministic term may not be negligible"
        ));
    }
    Ok(DetectionResult {
        qt,
        an_sq: an.iter().map(|z| z.norm_sqr()).collect(),
        sum_w2,
        p_value: p,
        theta_used,
        n_events: events.len(),
        warnings,
    })
}

/// Null mean and variance of `Q_T` given the weight scale `sum_w2`.
///
/// `Q_T T / sum_w2 = sum_{n>=1} |alpha_n|^2 X_n` with `X_n ~ chi-square(2)`,
/// so the mean is `(sum_w2 / T) sum_{n!=0} |alpha_n|^2` and the variance is
/// `2 (sum_w2 / T)^2 sum_{n!=0} |alpha_n|^4`.
pub fn null_moments(sum_w2: f64, template: &HarmonicTemplate, span: f64) -> (f64, f64) {
    let scale = sum_w2 / span;
    (
        scale * template.sum_sq(),
        2.0 * scale * scale * template.sum_fourth(),
    )
}
