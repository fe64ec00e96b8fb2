//! Frequency (and frequency-derivative) grid scans of `Q_T`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{fourier_coefficients, p_value, qt_statistic};
use crate::error::{invalid, Error, Result};
use crate::event::Event;
use crate::lightcurve::{HarmonicTemplate, PhaseModel};

/// Largest grid evaluated without an explicit override.
pub const DEFAULT_MAX_POINTS: u64 = 10_000_000;

/// Frequency-derivative axis of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FdotAxis {
    Fixed(f64),
    Range { lo: f64, hi: f64, steps: usize },
}

impl Default for FdotAxis {
    fn default() -> Self {
        Self::Fixed(0.0)
    }
}

impl FdotAxis {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Self::Fixed(v) => vec![v],
            Self::Range { lo, hi, steps } => {
                if steps <= 1 {
                    return vec![lo];
                }
                let h = (hi - lo) / (steps - 1) as f64;
                (0..steps).map(|k| lo + k as f64 * h).collect()
            }
        }
    }
}

fn default_oversample() -> f64 {
    10.0
}

fn default_max_points() -> u64 {
    DEFAULT_MAX_POINTS
}

/// Grid definition. The frequency step is `1 / (oversample m T)` so that
/// the highest harmonic drifts by less than one cycle between grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub f_lo: f64,
    pub f_hi: f64,
    #[serde(default)]
    pub fdot: FdotAxis,
    #[serde(default = "default_oversample")]
    pub oversample: f64,
    pub m: usize,
    #[serde(default = "default_max_points")]
    pub max_points: u64,
}

impl ScanSpec {
    pub fn new(f_lo: f64, f_hi: f64, oversample: f64, m: usize) -> Result<Self> {
        let spec = Self {
            f_lo,
            f_hi,
            fdot: FdotAxis::default(),
            oversample,
            m,
            max_points: DEFAULT_MAX_POINTS,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_lo.is_finite() && self.f_hi.is_finite() && self.f_lo < self.f_hi) {
            return Err(invalid(
                "scan.f_lo",
                format!("need f_lo < f_hi, got [{}, {}]", self.f_lo, self.f_hi),
            ));
        }
        if !(self.f_lo > 0.0) {
            return Err(invalid("scan.f_lo", "frequencies must be > 0"));
        }
        if !(self.oversample >= 1.0) {
            return Err(invalid(
                "scan.oversample",
                format!("must be >= 1, got {}", self.oversample),
            ));
        }
        if self.m == 0 {
            return Err(invalid("scan.m", "must be >= 1"));
        }
        if let FdotAxis::Range { lo, hi, steps } = self.fdot {
            if steps == 0 || !(lo <= hi) {
                return Err(invalid("scan.fdot", "need lo <= hi and steps >= 1"));
            }
        }
        Ok(())
    }

    pub fn step(&self, span: f64) -> f64 {
        1.0 / (self.oversample * self.m as f64 * span)
    }

    /// Number of frequency points: `f_k = f_lo + k step <= f_hi`.
    pub fn frequency_count(&self, span: f64) -> u64 {
        let n = ((self.f_hi - self.f_lo) / self.step(span) * (1.0 + 1e-12)).floor();
        n as u64 + 1
    }

    pub fn grid_size(&self, span: f64) -> u64 {
        self.frequency_count(span) * self.fdot.values().len() as u64
    }

    pub fn frequencies(&self, span: f64) -> Result<Vec<f64>> {
        self.validate()?;
        if !(span > 0.0) {
            return Err(invalid("span", format!("must be > 0, got {span}")));
        }
        let total = self.grid_size(span);
        if total > self.max_points {
            return Err(Error::GridTooLarge {
                points: total,
                max: self.max_points,
            });
        }
        let step = self.step(span);
        Ok((0..self.frequency_count(span))
            .map(|k| self.f_lo + k as f64 * step)
            .collect())
    }
}

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub f: f64,
    pub fdot: f64,
    pub qt: f64,
    pub p_value: f64,
}

/// Table of grid values and the smallest raw p-value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    pub step: f64,
    pub trials: usize,
    pub best: usize,
}

/// Compact summary of a scan for JSON output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSummary {
    pub trials: usize,
    pub step: f64,
    pub best_f: f64,
    pub best_fdot: f64,
    pub best_qt: f64,
    pub min_p_value: f64,
}

impl ScanResult {
    pub fn best_point(&self) -> &ScanPoint {
        &self.points[self.best]
    }

    pub fn summary(&self) -> ScanSummary {
        let b = self.best_point();
        ScanSummary {
            trials: self.trials,
            step: self.step,
            best_f: b.f,
            best_fdot: b.fdot,
            best_qt: b.qt,
            min_p_value: b.p_value,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["f", "fdot", "qt", "p_value"])?;
        for p in &self.points {
            w.write_record([
                format!("{:.16e}", p.f),
                format!("{:.16e}", p.fdot),
                format!("{:.16e}", p.qt),
                format!("{:.16e}", p.p_value),
            ])?;
        }
        w.flush()
    }
}

/// Evaluates `Q_T` and its raw p-value at every grid point. Each point is
/// computed independently, so values at shared points of different grids
/// agree exactly. Row order: frequency-derivative outer, frequency inner.
pub fn scan(
    events: &[Event],
    weights: &[f64],
    spec: &ScanSpec,
    template: &HarmonicTemplate,
    epoch: f64,
    span: f64,
) -> Result<ScanResult> {
    if events.is_empty() {
        return Err(Error::EmptyEvents);
    }
    if template.m() > spec.m {
        return Err(invalid(
            "template",
            format!(
                "uses {} harmonics but the scan is built for m = {}",
                template.m(),
                spec.m
            ),
        ));
    }
    let freqs = spec.frequencies(span)?;
    let sum_w2: f64 = weights.iter().map(|w| w * w).sum();
    if sum_w2 == 0.0 {
        return Err(Error::NoWeightedEvents);
    }
    let grid: Vec<(f64, f64)> = spec
        .fdot
        .values()
        .into_iter()
        .flat_map(|fd| freqs.iter().map(move |&f| (f, fd)))
        .collect();
    let points = grid
        .par_iter()
        .with_min_len(64)
        .map(|&(f, fdot)| {
            let model = PhaseModel { f, fdot, epoch };
            let an = fourier_coefficients(events, weights, &model, template.m())?;
            let qt = qt_statistic(&an, template, span)?;
            Ok(ScanPoint {
                f,
                fdot,
                qt,
                p_value: p_value(qt, sum_w2, template, span)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = points
        .iter()
        .enumerate()
        .min_by(|a, b| {
            a.1.p_value
                .total_cmp(&b.1.p_value)
                .then(b.1.qt.total_cmp(&a.1.qt))
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(ScanResult {
        trials: points.len(),
        step: spec.step(span),
        points,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_arithmetic() {
        let spec = ScanSpec::new(1.0, 1.01, 10.0, 10).unwrap();
        let span = 1e4;
        assert!((spec.step(span) - 1e-6).abs() < 1e-20);
        assert_eq!(spec.frequency_count(span), 10_001);
    }

    #[test]
    fn oversize_grid_is_rejected() {
        let mut spec = ScanSpec::new(1.0, 2.0, 10.0, 10).unwrap();
        spec.max_points = 1000;
        assert!(matches!(
            spec.frequencies(1e4).unwrap_err(),
            Error::GridTooLarge { .. }
        ));
    }

    #[test]
    fn invalid_specs() {
        assert!(ScanSpec::new(2.0, 1.0, 10.0, 1).is_err());
        assert!(ScanSpec::new(1.0, 2.0, 0.5, 1).is_err());
        assert!(ScanSpec::new(1.0, 2.0, 10.0, 0).is_err());
    }

    #[test]
    fn fdot_axis_values() {
        let a = FdotAxis::Range {
            lo: -1.0,
            hi: 1.0,
            steps: 3,
        };
        assert_eq!(a.values(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(FdotAxis::Fixed(0.5).values(), vec![0.5]);
    }

    #[test]
    fn coarse_grid_is_subset_of_fine_grid() {
        let span = 123.0;
        let coarse = ScanSpec::new(0.5, 0.6, 3.0, 2).unwrap();
        let fine = ScanSpec::new(0.5, 0.6, 6.0, 2).unwrap();
        let c = coarse.frequencies(span).unwrap();
        let f = fine.frequencies(span).unwrap();
        for (k, x) in c.iter().enumerate() {
            assert_eq!(*x, f[2 * k]);
        }
    }
}
