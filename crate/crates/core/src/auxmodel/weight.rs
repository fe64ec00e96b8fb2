//! Event weight functions and their moments under the source and background
//! densities.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::density::{AuxDensityPair, DiskGeometry, EnergySpectrum};
use crate::error::{invalid, Error, Result};
use crate::quadrature::Quadrature;

/// Closed selection region in `(E, phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutRegion {
    pub e_lo: f64,
    pub e_hi: f64,
    pub phi_max: f64,
}

impl CutRegion {
    pub fn new(e_lo: f64, e_hi: f64, phi_max: f64) -> Result<Self> {
        if e_lo > e_hi {
            return Err(invalid(
                "cut",
                format!("e_lo = {e_lo} exceeds e_hi = {e_hi}"),
            ));
        }
        if phi_max.is_nan() || phi_max < 0.0 {
            return Err(invalid("cut", "phi_max must be >= 0"));
        }
        Ok(Self {
            e_lo,
            e_hi,
            phi_max,
        })
    }

    /// Angular cut only.
    pub fn angle(phi_max: f64) -> Result<Self> {
        Self::new(f64::NEG_INFINITY, f64::INFINITY, phi_max)
    }

    #[inline]
    pub fn contains(&self, e: f64, phi: f64) -> bool {
        e >= self.e_lo && e <= self.e_hi && phi <= self.phi_max
    }
}

/// `cut_weight`: 1 inside the closed region, 0 outside.
pub fn cut_weight(e: f64, phi: f64, cut: &CutRegion) -> f64 {
    if cut.contains(e, phi) {
        1.0
    } else {
        0.0
    }
}

/// Probability that an event with auxiliary data `z` came from the source.
pub fn optimal_weight(e: f64, phi: f64, theta: f64, densities: &AuxDensityPair) -> Result<f64> {
    let (fs, fb) = densities.pdfs_for_ratio(e, phi);
    probability_ratio(theta, fs, fb)
}

#[inline]
fn probability_ratio(theta: f64, fs: f64, fb: f64) -> Result<f64> {
    if fs == 0.0 && fb == 0.0 {
        return Err(Error::OutsideSupport);
    }
    let src = theta * fs;
    let denom = (1.0 - theta) * fb + src;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(src / denom)
}

/// Closed-form Gaussian-PSF weight on a uniform-background disc.
///
/// With `spectra = Some((f_S(E), f_B(E)))` the energy spectra enter the
/// weight; otherwise only the angular information is used.
pub fn psf_gaussian_weight(
    e: f64,
    phi: f64,
    geom: &DiskGeometry,
    spectra: Option<(f64, f64)>,
) -> Result<f64> {
    let sigma = geom.sigma(e);
    if !(sigma > 0.0) {
        return Err(invalid(
            "sigma",
            format!("sigma(E) must be > 0, got {sigma}"),
        ));
    }
    if !(0.0..=geom.radius).contains(&phi) {
        return Err(invalid(
            "phi",
            format!("angle {phi} outside [0, {}]", geom.radius),
        ));
    }
    let xi = geom.xi(e);
    let growth = (0.5 * phi * phi / (sigma * sigma)).exp();
    let w = match spectra {
        None => 1.0 / (1.0 + xi * growth),
        Some((fs, fb)) => {
            if fs == 0.0 {
                0.0
            } else {
                fs / (fs + xi * growth * fb)
            }
        }
    };
    Ok(w)
}

/// User-supplied weight function with optional quadrature breakpoints.
#[derive(Clone)]
pub struct CustomWeight {
    func: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub energy_breaks: Vec<f64>,
    pub angle_breaks: Vec<f64>,
}

impl CustomWeight {
    pub fn new(func: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            func: Arc::new(func),
            energy_breaks: Vec::new(),
            angle_breaks: Vec::new(),
        }
    }
}

impl fmt::Debug for CustomWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomWeight").finish_non_exhaustive()
    }
}

/// Piecewise-constant weight on a rectangular `(E, phi)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseWeight {
    pub energy_edges: Vec<f64>,
    pub angle_edges: Vec<f64>,
    /// Row-major: `values[i * (angle cells) + j]` for energy cell `i`.
    pub values: Vec<f64>,
}

impl PiecewiseWeight {
    pub fn new(energy_edges: Vec<f64>, angle_edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let ok_edges = |v: &[f64]| v.len() >= 2 && v.windows(2).all(|w| w[0] < w[1]);
        if !ok_edges(&energy_edges) || !ok_edges(&angle_edges) {
            return Err(invalid("edges", "cell edges must be strictly increasing"));
        }
        let cells = (energy_edges.len() - 1) * (angle_edges.len() - 1);
        if values.len() != cells {
            return Err(invalid(
                "values",
                format!("expected {cells} values, got {}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("values", "weights must be finite and >= 0"));
        }
        Ok(Self {
            energy_edges,
            angle_edges,
            values,
        })
    }

    fn cell(edges: &[f64], x: f64) -> Option<usize> {
        if x < edges[0] || x > edges[edges.len() - 1] {
            return None;
        }
        let i = edges.partition_point(|&e| e <= x);
        Some(i.saturating_sub(1).min(edges.len() - 2))
    }

    pub fn eval(&self, e: f64, phi: f64) -> f64 {
        match (
            Self::cell(&self.energy_edges, e),
            Self::cell(&self.angle_edges, phi),
        ) {
            (Some(i), Some(j)) => self.values[i * (self.angle_edges.len() - 1) + j],
            _ => 0.0,
        }
    }
}

/// A weight function `w(z)`.
#[derive(Debug, Clone)]
pub enum WeightFunction {
    /// `w = 1`: no weighting.
    Unit,
    /// Posterior source probability given the full `z`.
    Optimal {
        theta: f64,
        densities: AuxDensityPair,
    },
    /// Posterior source probability from the angular conditionals only.
    OptimalNoSpectrum {
        theta: f64,
        densities: AuxDensityPair,
    },
    /// Closed-form Gaussian-PSF weight, with or without energy spectra.
    PsfGaussian {
        geometry: DiskGeometry,
        spectra: Option<(EnergySpectrum, EnergySpectrum)>,
    },
    Cut(CutRegion),
    Piecewise(PiecewiseWeight),
    /// Multiplies another weight by a positive constant.
    Scaled(f64, Box<WeightFunction>),
    Custom(CustomWeight),
}

impl WeightFunction {
    pub fn optimal(theta: f64, densities: AuxDensityPair) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self::Optimal { theta, densities })
    }

    pub fn optimal_no_spectrum(theta: f64, densities: AuxDensityPair) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self::OptimalNoSpectrum { theta, densities })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Unit => "unit",
            Self::Optimal { .. } => "optimal",
            Self::OptimalNoSpectrum { .. } => "optimal-no-spectrum",
            Self::PsfGaussian { .. } => "psf-gaussian",
            Self::Cut(_) => "cut",
            Self::Piecewise(_) => "piecewise",
            Self::Scaled(_, inner) => inner.kind(),
            Self::Custom(_) => "custom",
        }
    }

    /// Whether the weight is a probability and so bounded by `[0, 1]`.
    pub fn is_probability(&self) -> bool {
        matches!(
            self,
            Self::Optimal { .. } | Self::OptimalNoSpectrum { .. } | Self::PsfGaussian { .. }
        )
    }

    /// Whether the weight depends on the assumed source fraction.
    pub fn uses_theta(&self) -> bool {
        match self {
            Self::Optimal { .. } | Self::OptimalNoSpectrum { .. } => true,
            Self::Scaled(_, inner) => inner.uses_theta(),
            _ => false,
        }
    }

    /// Same weight with the source fraction replaced; no-op for kinds that do
    /// not use it.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Ok(match self {
            Self::Optimal { densities, .. } => Self::optimal(theta, *densities)?,
            Self::OptimalNoSpectrum { densities, .. } => {
                Self::optimal_no_spectrum(theta, *densities)?
            }
            Self::Scaled(c, inner) => Self::Scaled(*c, Box::new(inner.with_theta(theta)?)),
            other => other.clone(),
        })
    }

    pub fn scaled(self, c: f64) -> Self {
        Self::Scaled(c, Box::new(self))
    }

    /// Evaluates `w(E, phi)`.
    pub fn weight(&self, e: f64, phi: f64) -> Result<f64> {
        match self {
            Self::Unit => Ok(1.0),
            Self::Optimal { theta, densities } => optimal_weight(e, phi, *theta, densities),
            Self::OptimalNoSpectrum { theta, densities } => {
                let phi = if phi == 0.0 {
                    super::density::AXIS_FLOOR
                } else {
                    phi
                };
                let fs = densities.source.angle.pdf(phi, e);
                let fb = densities.background.angle.pdf(phi, e);
                probability_ratio(*theta, fs, fb)
            }
            Self::PsfGaussian { geometry, spectra } => {
                let s = spectra.map(|(src, bg)| (src.pdf(e), bg.pdf(e)));
                if let Some((0.0, 0.0)) = s {
                    return Err(Error::OutsideSupport);
                }
                psf_gaussian_weight(e, phi, geometry, s)
            }
            Self::Cut(c) => Ok(cut_weight(e, phi, c)),
            Self::Piecewise(p) => Ok(p.eval(e, phi)),
            Self::Scaled(c, inner) => Ok(c * inner.weight(e, phi)?),
            Self::Custom(c) => Ok((c.func)(e, phi)),
        }
    }

    /// Weight with points outside the model support mapped to zero.
    #[inline]
    pub fn weight_or_zero(&self, e: f64, phi: f64) -> f64 {
        self.weight(e, phi).unwrap_or(0.0)
    }

    fn energy_breaks(&self) -> Vec<f64> {
        match self {
            Self::Cut(c) => [c.e_lo, c.e_hi]
                .into_iter()
                .filter(|x| x.is_finite())
                .collect(),
            Self::Piecewise(p) => p.energy_edges.clone(),
            Self::PsfGaussian {
                spectra: Some((a, b)),
                ..
            } => vec![a.range().0, a.range().1, b.range().0, b.range().1],
            Self::Scaled(_, inner) => inner.energy_breaks(),
            Self::Custom(c) => c.energy_breaks.clone(),
            _ => Vec::new(),
        }
    }

    fn angle_breaks(&self) -> Vec<f64> {
        match self {
            Self::Cut(c) => vec![c.phi_max],
            Self::Piecewise(p) => p.angle_edges.clone(),
            Self::Scaled(_, inner) => inner.angle_breaks(),
            Self::Custom(c) => c.angle_breaks.clone(),
            _ => Vec::new(),
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(invalid("theta", format!("must be in [0, 1], got {theta}")))
    }
}

/// First and second moments of a weight under each density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightMoments {
    pub beta1: f64,
    pub beta2: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    /// `E(W) = (1 - theta) beta1 + theta zeta1`.
    pub ew: f64,
    /// `E(W^2) = (1 - theta) beta2 + theta zeta2`.
    pub ew2: f64,
}

/// Moments of `w` by nested adaptive quadrature (energy outer, angle inner).
pub fn weight_moments(
    w: &WeightFunction,
    theta: f64,
    densities: &AuxDensityPair,
) -> Result<WeightMoments> {
    weight_moments_with(w, theta, densities, &Quadrature::default())
}

pub fn weight_moments_with(
    w: &WeightFunction,
    theta: f64,
    densities: &AuxDensityPair,
    q: &Quadrature,
) -> Result<WeightMoments> {
    check_theta(theta)?;
    let eb = w.energy_breaks();
    let pb = w.angle_breaks();
    let moment = |power: i32, source: bool| {
        densities.integrate_with(q, &eb, &pb, |e, phi, fs, fb| {
            let f = if source { fs } else { fb };
            if f == 0.0 {
                0.0
            } else {
                w.weight_or_zero(e, phi).powi(power) * f
            }
        })
    };
    let beta1 = moment(1, false)?;
    let beta2 = moment(2, false)?;
    let zeta1 = moment(1, true)?;
    let zeta2 = moment(2, true)?;
    Ok(WeightMoments {
        beta1,
        beta2,
        zeta1,
        zeta2,
        ew: (1.0 - theta) * beta1 + theta * zeta1,
        ew2: (1.0 - theta) * beta2 + theta * zeta2,
    })
}

/// Efficiency of a weight function: `zeta1^2 / E(W^2)`.
pub fn weight_efficiency(m: &WeightMoments, theta: f64) -> Result<f64> {
    let denom = (1.0 - theta) * m.beta2 + theta * m.zeta2;
    if !(denom > 0.0) {
        return Err(Error::DegenerateWeight);
    }
    Ok(m.zeta1 * m.zeta1 / denom)
}

/// Efficiency of the optimal weight, `(1/theta) E_S[w_opt]`.
pub fn optimal_efficiency(theta: f64, densities: &AuxDensityPair) -> Result<f64> {
    optimal_efficiency_with(theta, densities, &Quadrature::default())
}

pub fn optimal_efficiency_with(
    theta: f64,
    densities: &AuxDensityPair,
    q: &Quadrature,
) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(invalid("theta", format!("must be in (0, 1), got {theta}")));
    }
    let v = densities.integrate_with(q, &[], &[], |_, _, fs, fb| {
        if fs == 0.0 {
            0.0
        } else {
            theta * fs / ((1.0 - theta) * fb + theta * fs) * fs
        }
    })?;
    Ok(v / theta)
}

/// Efficiency computed through the correlation of `w` with the optimal
/// weight under the marginal density of `z`.
pub fn correlation_efficiency(
    w: &WeightFunction,
    theta: f64,
    densities: &AuxDensityPair,
) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(invalid("theta", format!("must be in (0, 1], got {theta}")));
    }
    let q = Quadrature::default();
    let eb = w.energy_breaks();
    let pb = w.angle_breaks();
    let marginal = |fs: f64, fb: f64| (1.0 - theta) * fb + theta * fs;
    let cross = densities.integrate_with(&q, &eb, &pb, |e, phi, fs, fb| {
        let m = marginal(fs, fb);
        if m == 0.0 {
            return 0.0;
        }
        let w_opt = theta * fs / m;
        w.weight_or_zero(e, phi) * w_opt * m
    })?;
    let second = densities.integrate_with(&q, &eb, &pb, |e, phi, fs, fb| {
        let wv = w.weight_or_zero(e, phi);
        wv * wv * marginal(fs, fb)
    })?;
    if !(second > 0.0) {
        return Err(Error::DegenerateWeight);
    }
    Ok(cross * cross / second / (theta * theta))
}

/// Expected Fisher information per event for the source fraction.
pub fn fisher_information(theta: f64, densities: &AuxDensityPair) -> Result<f64> {
    check_theta(theta)?;
    let q = Quadrature::with_rtol(1e-7);
    densities.integrate_with(&q, &[], &[], |_, _, fs, fb| {
        let m = (1.0 - theta) * fb + theta * fs;
        if m == 0.0 {
            0.0
        } else {
            (fs - fb) * (fs - fb) / m
        }
    })
}
