//! Periodic light curves as truncated Fourier series.
//!
//! A [`LightCurveProfile`] is the rate shape `1 + eta * sum_{n != 0} g_n e^{2 pi i n x}`
//! with `g_{-n} = conj(g_n)`, so only `n >= 1` is stored. A [`HarmonicTemplate`]
//! is the power spectrum `|a_n|^2` a test is tuned to. Every sum over `n != 0`
//! is evaluated as twice the sum over `n >= 1`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::detector::fourier_coefficients;
use crate::error::{invalid, Error, Result};
use crate::event::Event;

/// Default number of harmonics for templates built without an explicit `m`.
pub const DEFAULT_HARMONICS: usize = 10;

/// Phase grid used to validate profile nonnegativity.
pub const VALIDATION_GRID: usize = 1024;
const NEGATIVITY_TOL: f64 = -1e-9;

/// Target spectrum `|a_n|^2`, `n = 1..=m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTemplate", into = "RawTemplate")]
pub struct HarmonicTemplate {
    amps_sq: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTemplate {
    m: usize,
    amps_sq: Vec<f64>,
}

impl TryFrom<RawTemplate> for HarmonicTemplate {
    type Error = Error;
    fn try_from(raw: RawTemplate) -> Result<Self> {
        if raw.m != raw.amps_sq.len() {
            return Err(invalid(
                "m",
                format!("m = {} but {} amplitudes given", raw.m, raw.amps_sq.len()),
            ));
        }
        Self::new(raw.amps_sq)
    }
}

impl From<HarmonicTemplate> for RawTemplate {
    fn from(t: HarmonicTemplate) -> Self {
        RawTemplate {
            m: t.amps_sq.len(),
            amps_sq: t.amps_sq,
        }
    }
}

impl HarmonicTemplate {
    pub fn new(amps_sq: Vec<f64>) -> Result<Self> {
        if amps_sq.is_empty() {
            return Err(invalid("m", "template needs at least one harmonic"));
        }
        if amps_sq.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(invalid(
                "amps_sq",
                "amplitudes must be finite and nonnegative",
            ));
        }
        if amps_sq.iter().all(|&a| a == 0.0) {
            return Err(Error::EmptySpectrum);
        }
        Ok(Self { amps_sq })
    }

    /// The Z^2_m template: `|a_n|^2 = 1` for `n <= m`.
    pub fn z_m(m: usize) -> Result<Self> {
        Self::new(vec![1.0; m])
    }

    /// Rayleigh's test, `Z^2_1`.
    pub fn rayleigh() -> Self {
        Self { amps_sq: vec![1.0] }
    }

    /// Template proportional to a source's power spectrum.
    pub fn matched(source: &LightCurveProfile) -> Result<Self> {
        Self::new(source.power_spectrum())
    }

    pub fn m(&self) -> usize {
        self.amps_sq.len()
    }

    pub fn amps_sq(&self) -> &[f64] {
        &self.amps_sq
    }

    /// `sum_{n != 0} |a_n|^2`.
    pub fn sum_sq(&self) -> f64 {
        2.0 * self.amps_sq.iter().sum::<f64>()
    }

    /// `sum_{n != 0} |a_n|^4`.
    pub fn sum_fourth(&self) -> f64 {
        2.0 * self.amps_sq.iter().map(|a| a * a).sum::<f64>()
    }
}

/// Source light curve `1 + eta * sum_{n != 0} g_n e^{2 pi i n x}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct LightCurveProfile {
    coeffs: Vec<Complex64>,
    eta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    m: usize,
    eta: f64,
    coeffs: Vec<[f64; 2]>,
}

impl TryFrom<RawProfile> for LightCurveProfile {
    type Error = Error;
    fn try_from(raw: RawProfile) -> Result<Self> {
        if raw.m != raw.coeffs.len() {
            return Err(invalid(
                "m",
                format!("m = {} but {} coefficients given", raw.m, raw.coeffs.len()),
            ));
        }
        let coeffs = raw
            .coeffs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        Self::new(coeffs, raw.eta)
    }
}

impl From<LightCurveProfile> for RawProfile {
    fn from(p: LightCurveProfile) -> Self {
        RawProfile {
            m: p.coeffs.len(),
            eta: p.eta,
            coeffs: p.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl LightCurveProfile {
    /// Builds a profile, rejecting any `eta` that makes it negative on the
    /// validation grid.
    pub fn new(coeffs: Vec<Complex64>, eta: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("m", "profile needs at least one harmonic"));
        }
        if !eta.is_finite() || eta < 0.0 {
            return Err(invalid(
                "eta",
                format!("must be finite and >= 0, got {eta}"),
            ));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(invalid("coeffs", "coefficients must be finite"));
        }
        let profile = Self { coeffs, eta };
        for k in 0..VALIDATION_GRID {
            let phase = k as f64 / VALIDATION_GRID as f64;
            let value = profile.eval(phase);
            if value < NEGATIVITY_TOL {
                return Err(Error::NegativeProfile { phase, value });
            }
        }
        Ok(profile)
    }

    /// A constant light curve (`eta = 0`).
    pub fn flat() -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0)],
            eta: 0.0,
        }
    }

    /// Single cosine harmonic: `1 + 2 eta g cos(2 pi x)`.
    pub fn sinusoid(gamma1: f64, eta: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(gamma1, 0.0)], eta)
    }

    pub fn m(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `|g_n|^2` for `n = 1..=m`, without the `eta` factor.
    pub fn power_spectrum(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `eta^2 |g_n|^2`, the pulsed power that drives detection.
    pub fn pulsed_spectrum(&self) -> Vec<f64> {
        let e2 = self.eta * self.eta;
        self.coeffs.iter().map(|c| e2 * c.norm_sqr()).collect()
    }

    /// Same coefficients with a different strength; validated again.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(self.coeffs.clone(), eta)
    }

    /// Evaluates the profile at `phase` (reduced mod 1).
    pub fn eval(&self, phase: f64) -> f64 {
        if self.eta == 0.0 {
            return 1.0;
        }
        let x = phase.rem_euclid(1.0);
        let mut acc = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let n = (k + 1) as f64;
            let arg = TAU * (n * x).rem_euclid(1.0);
            let (s, co) = arg.sin_cos();
            acc += c.re * co - c.im * s;
        }
        1.0 + 2.0 * self.eta * acc
    }

    /// Maximum over a uniform phase grid of `points` samples.
    pub fn grid_max(&self, points: usize) -> f64 {
        (0..points)
            .map(|k| self.eval(k as f64 / points as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `eval_profile`: free-function form of [`LightCurveProfile::eval`].
pub fn eval_profile(profile: &LightCurveProfile, phase: f64) -> f64 {
    profile.eval(phase)
}

/// Phase function `phi(t) = f (t - t0) + fdot (t - t0)^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseModel {
    pub f: f64,
    #[serde(default)]
    pub fdot: f64,
    #[serde(default)]
    pub epoch: f64,
}

impl PhaseModel {
    pub fn new(f: f64, fdot: f64, epoch: f64) -> Result<Self> {
        if !(f.is_finite() && f > 0.0) {
            return Err(invalid("f", format!("frequency must be > 0, got {f}")));
        }
        if !fdot.is_finite() || !epoch.is_finite() {
            return Err(invalid("fdot", "fdot and epoch must be finite"));
        }
        Ok(Self { f, fdot, epoch })
    }

    /// Cycle count at `t`; not reduced mod 1.
    #[inline]
    pub fn phase(&self, t: f64) -> f64 {
        let dt = t - self.epoch;
        self.f * dt + 0.5 * self.fdot * dt * dt
    }

    /// Whether the phase is nondecreasing over `[t0, t1]`.
    pub fn is_monotone_on(&self, t0: f64, t1: f64) -> bool {
        let rate = |t: f64| self.f + self.fdot * (t - self.epoch);
        rate(t0) >= 0.0 && rate(t1) >= 0.0
    }

    /// Same model with frequency and frequency derivative replaced.
    pub fn retuned(&self, f: f64, fdot: f64) -> Self {
        Self { f, fdot, ..*self }
    }
}

/// `phase_of`: free-function form of [`PhaseModel::phase`].
pub fn phase_of(model: &PhaseModel, t: f64) -> f64 {
    model.phase(t)
}

/// Fraction of the optimal-template signal-to-noise ratio that `template`
/// attains against `source`; 1 when the spectra are proportional.
pub fn template_efficiency(template: &HarmonicTemplate, source: &LightCurveProfile) -> Result<f64> {
    spectrum_efficiency(template.amps_sq(), &source.power_spectrum())
}

/// [`template_efficiency`] on raw power spectra (`n = 1..`).
pub fn spectrum_efficiency(template: &[f64], source: &[f64]) -> Result<f64> {
    let len = template.len().max(source.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let mut cross = 0.0;
    let mut t4 = 0.0;
    let mut s4 = 0.0;
    for i in 0..len {
        let (a, g) = (at(template, i), at(source, i));
        cross += a * g;
        t4 += a * a;
        s4 += g * g;
    }
    if t4 == 0.0 || s4 == 0.0 {
        return Err(Error::EmptySpectrum);
    }
    // The factor 2 from n != 0 cancels between numerator and the two norms.
    Ok(cross / (t4.sqrt() * s4.sqrt()))
}

/// Empirical light curve from event phases, normalized so that
/// `sum_{n=1..m} |g_n|^2 = 1`.
///
/// `g_n` is taken as `conj(A_n)` so the estimate lines up with the
/// generating profile at zero phase offset. The strength is 1 unless the
/// normalized curve would go negative, in which case it is reduced to the
/// largest admissible value.
pub fn estimate_profile_coeffs(
    events: &[Event],
    model: &PhaseModel,
    m: usize,
    weights: Option<&[f64]>,
) -> Result<LightCurveProfile> {
    if events.is_empty() {
        return Err(Error::EmptyEvents);
    }
    if m == 0 {
        return Err(invalid("m", "need at least one harmonic"));
    }
    let unit;
    let w = match weights {
        Some(w) => w,
        None => {
            unit = vec![1.0; events.len()];
            &unit
        }
    };
    let a = fourier_coefficients(events, w, model, m)?;
    let total_w: f64 = w.iter().sum();
    let power: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    if total_w <= 0.0 || power / (total_w * total_w) < 1e-9 {
        return Err(Error::NoHarmonicContent);
    }
    let scale = power.sqrt();
    let coeffs: Vec<Complex64> = a.iter().map(|z| z.conj() / scale).collect();

    let shape = LightCurveProfile {
        coeffs: coeffs.clone(),
        eta: 1.0,
    };
    let min_excess = (0..VALIDATION_GRID)
        .map(|k| shape.eval(k as f64 / VALIDATION_GRID as f64) - 1.0)
        .fold(f64::INFINITY, f64::min);
    let eta = if min_excess >= -1.0 {
        1.0
    } else {
        (1.0 / -min_excess) * (1.0 - 1e-12)
    };
    LightCurveProfile::new(coeffs, eta)
}
