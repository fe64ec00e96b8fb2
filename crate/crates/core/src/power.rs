//! Analytic power predictions and their Monte Carlo counterparts.
//!
//! The signal-to-noise ratio of `Q_T` is `(E_K Q_T - E_H Q_T) / sd_H Q_T`.
//! With `S = sum_j w_j^2` the null law is `Q_T T / S = sum_{n>=1} a_n X_n`,
//! `X_n ~ chi-square(2)`, and a source of strength `theta` adds
//! `(2 / T) sum_{n>=1} a_n (theta mu0 T zeta1 eta |g_n|)^2` to the mean, which gives
//!
//! `snr = theta^2 T mu0 E(w) sum_{n>=1} a_n eta^2 |g_n|^2 / (sum_{n>=1} a_n^2)^(1/2)`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxmodel::{AuxDensityPair, WeightFunction};
use crate::detector::{fourier_coefficients, p_value, qt_statistic, DetectionResult};
use crate::error::{invalid, Error, Result};
use crate::lightcurve::{HarmonicTemplate, LightCurveProfile, PhaseModel};
use crate::simulator::{derive_seed, simulate, RateModel};
use crate::stats::summarize;

/// Replicate count used when none is given.
pub const DEFAULT_REPLICATES: usize = 2000;

/// Predicted detection power of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPrediction {
    pub snr: f64,
    pub efficiency_w: f64,
    /// `sum_{n>=1} a_n eta^2 |g_n|^2 / (sum_{n>=1} a_n^2)^(1/2)`.
    pub template_match: f64,
    pub theta: f64,
    pub span: f64,
    pub mu0: f64,
}

/// Template match ratio against the pulsed spectrum `eta^2 |g_n|^2`.
pub fn template_match(template: &HarmonicTemplate, source: &LightCurveProfile) -> f64 {
    let pulsed = source.pulsed_spectrum();
    let cross: f64 = template
        .amps_sq()
        .iter()
        .zip(&pulsed)
        .map(|(a, g)| a * g)
        .sum();
    let norm = (0.5 * template.sum_fourth()).sqrt();
    cross / norm
}

pub fn predicted_snr(
    theta: f64,
    span: f64,
    mu0: f64,
    eff_w: f64,
    template: &HarmonicTemplate,
    source: &LightCurveProfile,
) -> Result<PowerPrediction> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(invalid("theta", format!("must be in [0, 1], got {theta}")));
    }
    if !(span > 0.0) {
        return Err(invalid("span", format!("must be > 0, got {span}")));
    }
    if !(mu0 > 0.0) {
        return Err(invalid("mu0", format!("must be > 0, got {mu0}")));
    }
    if !(eff_w > 0.0) {
        return Err(invalid("eff_w", format!("must be > 0, got {eff_w}")));
    }
    let matching = template_match(template, source);
    Ok(PowerPrediction {
        snr: theta * theta * span * mu0 * eff_w * matching,
        efficiency_w: eff_w,
        template_match: matching,
        theta,
        span,
        mu0,
    })
}

/// Smallest source fraction reaching `target_snr`.
pub fn threshold_theta(
    span: f64,
    mu0: f64,
    eff_w: f64,
    template: &HarmonicTemplate,
    source: &LightCurveProfile,
    target_snr: f64,
) -> Result<f64> {
    if !(target_snr >= 0.0) {
        return Err(invalid(
            "target_snr",
            format!("must be >= 0, got {target_snr}"),
        ));
    }
    let unit = predicted_snr(1.0, span, mu0, eff_w, template, source)?;
    if unit.template_match == 0.0 {
        return Err(Error::OrthogonalTemplate);
    }
    Ok((target_snr / unit.snr).sqrt())
}

/// Empirical signal-to-noise ratio with a delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalSnr {
    pub snr: f64,
    pub stderr: f64,
}

/// `(mean(alt) - mean(null)) / sd(null)` from independent samples.
pub fn empirical_snr(null: &[f64], alt: &[f64]) -> EmpiricalSnr {
    let h = summarize(null);
    let k = summarize(alt);
    let sd = h.variance.sqrt();
    let snr = (k.mean - h.mean) / sd;
    // Var of the numerator plus the sd estimate's contribution (normal approx).
    let num_var = (h.stderr.powi(2) + k.stderr.powi(2)) / (sd * sd);
    let sd_rel_var = 1.0 / (2.0 * (h.n as f64 - 1.0));
    EmpiricalSnr {
        snr,
        stderr: (num_var + snr * snr * sd_rel_var).sqrt(),
    }
}

/// Shared simulation setup for replicate studies: one simulated stream per
/// replicate, analysed with every weight and template.
#[derive(Debug, Clone)]
pub struct MonteCarloSetup {
    pub rate: RateModel,
    pub densities: AuxDensityPair,
    pub weights: Vec<WeightFunction>,
    pub templates: Vec<HarmonicTemplate>,
    /// Phase model used for detection; the rate model's own by default.
    pub detect_phase: Option<PhaseModel>,
}

/// Outcome of one replicate: `results[weight][template]`.
#[derive(Debug, Clone)]
pub struct ReplicateOutcome {
    pub n_events: usize,
    pub results: Vec<Vec<DetectionResult>>,
}

impl MonteCarloSetup {
    fn max_m(&self) -> usize {
        self.templates
            .iter()
            .map(HarmonicTemplate::m)
            .max()
            .unwrap_or(1)
    }

    fn run_one(&self, seed: u64) -> Result<ReplicateOutcome> {
        let events = simulate(&self.rate, &self.densities, 0.0, seed)?;
        let phase = self.detect_phase.unwrap_or(self.rate.phase);
        let span = self.rate.span;
        let m = self.max_m();
        let mut results = Vec::with_capacity(self.weights.len());
        for wf in &self.weights {
            let w = events
                .iter()
                .map(|e| wf.weight(e.energy, e.angle))
                .collect::<Result<Vec<f64>>>()?;
            let sum_w2: f64 = w.iter().map(|x| x * x).sum();
            let an = fourier_coefficients(&events, &w, &phase, m)?;
            let an_sq: Vec<f64> = an.iter().map(|z| z.norm_sqr()).collect();
            let mut per_template = Vec::with_capacity(self.templates.len());
            for t in &self.templates {
                let qt = qt_statistic(&an, t, span)?;
                let p = if sum_w2 > 0.0 {
                    p_value(qt, sum_w2, t, span)?
                } else {
                    1.0
                };
                per_template.push(DetectionResult {
                    qt,
                    an_sq: an_sq[..t.m()].to_vec(),
                    sum_w2,
                    p_value: p,
                    theta_used: Some(self.rate.theta),
                    n_events: events.len(),
                    warnings: Vec::new(),
                });
            }
            results.push(per_template);
        }
        Ok(ReplicateOutcome {
            n_events: events.len(),
            results,
        })
    }

    /// Runs `replicates` independent simulations in parallel; replicate `i`
    /// uses seed `derive_seed(seed, i)` and results come back in order.
    pub fn run(&self, replicates: usize, seed: u64) -> Result<Vec<ReplicateOutcome>> {
        (0..replicates as u64)
            .into_par_iter()
            .map(|i| self.run_one(derive_seed(seed, i)))
            .collect()
    }
}

/// Collects `Q_T` for one (weight, template) pair across replicates.
pub fn qt_column(outcomes: &[ReplicateOutcome], weight: usize, template: usize) -> Vec<f64> {
    outcomes
        .iter()
        .map(|o| o.results[weight][template].qt)
        .collect()
}

/// How frequency offsets are applied in a mismatch study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MismatchMode {
    /// `f = f0 + Delta / T`.
    FOnly,
    /// `f = f0 + Delta / T` and `fdot = fdot0 + Delta / T^2`.
    FAndFdot,
}

/// How the factor is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MismatchVia {
    /// Ratio of mean signal excess at `Delta` to that at zero offset.
    Empirical,
    /// `1 - kappa (n Delta)^2` with `kappa` fitted at small offsets.
    QuadraticFit,
}

/// Simulation inputs for mismatch studies.
#[derive(Debug, Clone)]
pub struct MismatchSetup {
    pub model: RateModel,
    pub densities: AuxDensityPair,
    pub weight: WeightFunction,
    pub replicates: usize,
    pub seed: u64,
}

/// One mismatch estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MismatchPoint {
    pub n: usize,
    pub delta: f64,
    pub factor: f64,
    pub mc_stderr: f64,
}

/// Mismatch factor with the fitted curvature when available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MismatchEstimate {
    pub factor: f64,
    pub mc_stderr: f64,
    pub kappa: Option<f64>,
}

/// Values of `n Delta` at which the quadratic coefficient is fitted.
pub const FIT_OFFSETS: [f64; 4] = [0.05, 0.10, 0.15, 0.20];

fn offset_model(base: &PhaseModel, delta: f64, span: f64, mode: MismatchMode) -> PhaseModel {
    let f = base.f + delta / span;
    let fdot = match mode {
        MismatchMode::FOnly => base.fdot,
        MismatchMode::FAndFdot => base.fdot + delta / (span * span),
    };
    base.retuned(f, fdot)
}

/// Per-replicate signal excess `|A_n|^2 - sum w^2` for `n = 1..=max_n` at
/// each frequency offset, indexed `[replicate][offset][n - 1]`. All offsets
/// are evaluated on the same simulated streams.
pub fn mismatch_excess(
    setup: &MismatchSetup,
    max_n: usize,
    offsets: &[f64],
    mode: MismatchMode,
) -> Result<Vec<Vec<Vec<f64>>>> {
    if let Some(&d) = offsets.iter().find(|d| !(d.abs() < 1.0)) {
        return Err(Error::OutsideRegime(d.abs()));
    }
    if max_n == 0 {
        return Err(invalid("n", "harmonics must be >= 1"));
    }
    let span = setup.model.span;
    let base = setup.model.phase;
    let models: Vec<PhaseModel> = offsets
        .iter()
        .map(|&d| offset_model(&base, d, span, mode))
        .collect();
    (0..setup.replicates as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<Vec<f64>>> {
            let events = simulate(
                &setup.model,
                &setup.densities,
                0.0,
                derive_seed(setup.seed, i),
            )?;
            let w = events
                .iter()
                .map(|e| setup.weight.weight(e.energy, e.angle))
                .collect::<Result<Vec<f64>>>()?;
            let s2: f64 = w.iter().map(|x| x * x).sum();
            models
                .iter()
                .map(|pm| {
                    let an = fourier_coefficients(&events, &w, pm, max_n)?;
                    Ok(an.iter().map(|z| z.norm_sqr() - s2).collect())
                })
                .collect()
        })
        .collect()
}

/// Empirical mismatch factors for every `(n, Delta)` pair, from the same
/// simulated streams (common random numbers).
pub fn mismatch_curve(
    setup: &MismatchSetup,
    harmonics: &[usize],
    deltas: &[f64],
    mode: MismatchMode,
) -> Result<Vec<MismatchPoint>> {
    if harmonics.is_empty() || harmonics.contains(&0) {
        return Err(invalid("n", "harmonics must be >= 1"));
    }
    if setup.replicates < 2 {
        return Err(invalid("replicates", "need at least 2"));
    }
    let max_n = *harmonics.iter().max().unwrap();
    let mut offsets = vec![0.0];
    offsets.extend_from_slice(deltas);
    let per_rep = mismatch_excess(setup, max_n, &offsets, mode)?;

    let reps = setup.replicates as f64;
    let mut out = Vec::new();
    for &n in harmonics {
        let y: Vec<f64> = per_rep.iter().map(|r| r[0][n - 1]).collect();
        let mean_y = y.iter().sum::<f64>() / reps;
        if !(mean_y > 0.0) {
            return Err(Error::NoHarmonicContent);
        }
        for (k, &delta) in deltas.iter().enumerate() {
            let x: Vec<f64> = per_rep.iter().map(|r| r[k + 1][n - 1]).collect();
            let mean_x = x.iter().sum::<f64>() / reps;
            let ratio = mean_x / mean_y;
            let resid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - ratio * b).collect();
            let var = summarize(&resid).variance;
            out.push(MismatchPoint {
                n,
                delta,
                factor: ratio,
                mc_stderr: (var / reps).sqrt() / mean_y,
            });
        }
    }
    Ok(out)
}

/// Fitted `kappa` in `1 - kappa x^2` through the origin, `x = n Delta`.
pub fn fit_kappa(points: &[(f64, f64)]) -> f64 {
    let num: f64 = points.iter().map(|&(x, f)| (1.0 - f) * x * x).sum();
    let den: f64 = points.iter().map(|&(x, _)| x.powi(4)).sum();
    num / den
}

/// Power retained at harmonic `n` when the frequency is off by `Delta / T`.
pub fn mismatch_factor(
    n: usize,
    delta: f64,
    mode: MismatchMode,
    via: MismatchVia,
    setup: &MismatchSetup,
) -> Result<MismatchEstimate> {
    if !(delta.abs() < 1.0) {
        return Err(Error::OutsideRegime(delta.abs()));
    }
    match via {
        MismatchVia::Empirical => {
            let p = mismatch_curve(setup, &[n], &[delta], mode)?[0];
            Ok(MismatchEstimate {
                factor: p.factor,
                mc_stderr: p.mc_stderr,
                kappa: None,
            })
        }
        MismatchVia::QuadraticFit => {
            let deltas: Vec<f64> = FIT_OFFSETS.iter().map(|x| x / n as f64).collect();
            let pts = mismatch_curve(setup, &[n], &deltas, mode)?;
            let xy: Vec<(f64, f64)> = pts.iter().map(|p| (n as f64 * p.delta, p.factor)).collect();
            let kappa = fit_kappa(&xy);
            let den: f64 = xy.iter().map(|&(x, _)| x.powi(4)).sum();
            let kappa_se = (pts
                .iter()
                .zip(&xy)
                .map(|(p, &(x, _))| (p.mc_stderr * x * x).powi(2))
                .sum::<f64>())
            .sqrt()
                / den;
            let x = n as f64 * delta;
            Ok(MismatchEstimate {
                factor: (1.0 - kappa * x * x).clamp(0.0, 1.0),
                mc_stderr: kappa_se * x * x,
                kappa: Some(kappa),
            })
        }
    }
}

/// Writes mismatch points as CSV with header `n,Delta,factor,mc_stderr`.
pub fn write_mismatch_csv<W: Write>(points: &[MismatchPoint], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "Delta", "factor", "mc_stderr"])?;
    for p in points {
        w.write_record([
            p.n.to_string(),
            format!("{:.16e}", p.delta),
            format!("{:.16e}", p.factor),
            format!("{:.16e}", p.mc_stderr),
        ])?;
    }
    w.flush()
}

/// Percent efficiency of `Z_m` templates, `m = 1..=max_m`, relative to the
/// template proportional to the source spectrum.
pub fn zm_efficiency_table(source: &LightCurveProfile, max_m: usize) -> Result<Vec<(usize, f64)>> {
    (1..=max_m)
        .map(|m| {
            let t = HarmonicTemplate::z_m(m)?;
            Ok((
                m,
                100.0 * crate::lightcurve::template_efficiency(&t, source)?,
            ))
        })
        .collect()
}
