//! Factorized auxiliary-variable densities `f(E, phi) = f(E) f(phi | E)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::Quadrature;

/// Energy marginal on a bounded range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnergySpectrum {
    Flat {
        e_min: f64,
        e_max: f64,
    },
    /// `dN/dE ~ E^-index` on `[e_min, e_max]`.
    PowerLaw {
        index: f64,
        e_min: f64,
        e_max: f64,
    },
}

impl EnergySpectrum {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.range();
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(invalid(
                "spectrum",
                format!("need e_min < e_max, got [{lo}, {hi}]"),
            ));
        }
        if let Self::PowerLaw { index, e_min, .. } = *self {
            if !index.is_finite() || e_min <= 0.0 {
                return Err(invalid(
                    "spectrum",
                    "power law needs e_min > 0 and finite index",
                ));
            }
        }
        Ok(())
    }

    pub fn range(&self) -> (f64, f64) {
        match *self {
            Self::Flat { e_min, e_max } | Self::PowerLaw { e_min, e_max, .. } => (e_min, e_max),
        }
    }

    fn power_law_norm(index: f64, lo: f64, hi: f64) -> f64 {
        if (index - 1.0).abs() < 1e-12 {
            (hi / lo).ln()
        } else {
            let k = 1.0 - index;
            (hi.powf(k) - lo.powf(k)) / k
        }
    }

    pub fn pdf(&self, e: f64) -> f64 {
        let (lo, hi) = self.range();
        if e < lo || e > hi {
            return 0.0;
        }
        match *self {
            Self::Flat { e_min, e_max } => 1.0 / (e_max - e_min),
            Self::PowerLaw {
                index,
                e_min,
                e_max,
            } => e.powf(-index) / Self::power_law_norm(index, e_min, e_max),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match *self {
            Self::Flat { e_min, e_max } => e_min + u * (e_max - e_min),
            Self::PowerLaw {
                index,
                e_min,
                e_max,
            } => {
                if (index - 1.0).abs() < 1e-12 {
                    e_min * (e_max / e_min).powf(u)
                } else {
                    let k = 1.0 - index;
                    let (a, b) = (e_min.powf(k), e_max.powf(k));
                    (a + u * (b - a)).powf(1.0 / k)
                }
            }
        }
    }
}

/// PSF width as a function of energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SigmaModel {
    Constant {
        sigma: f64,
    },
    /// `sigma(E) = sigma_ref * (E / e_ref)^-index`.
    PowerLaw {
        sigma_ref: f64,
        e_ref: f64,
        index: f64,
    },
}

impl SigmaModel {
    pub fn constant(sigma: f64) -> Self {
        Self::Constant { sigma }
    }

    #[inline]
    pub fn sigma(&self, e: f64) -> f64 {
        match *self {
            Self::Constant { sigma } => sigma,
            Self::PowerLaw {
                sigma_ref,
                e_ref,
                index,
            } => sigma_ref * (e / e_ref).powf(-index),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Constant { sigma } => sigma > 0.0 && sigma.is_finite(),
            Self::PowerLaw {
                sigma_ref,
                e_ref,
                index,
            } => sigma_ref > 0.0 && e_ref > 0.0 && index.is_finite() && sigma_ref.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid("sigma", "PSF width must be positive"))
        }
    }
}

/// Incidence-angle density conditional on energy, supported on `[0, radius]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AngleConditional {
    /// Radial offset of a circular Gaussian PSF, renormalized to the disc.
    GaussianPsf { sigma: SigmaModel, radius: f64 },
    /// Uniform surface density on the disc: `2 phi / R^2`.
    UniformDisc { radius: f64 },
}

impl AngleConditional {
    pub fn radius(&self) -> f64 {
        match *self {
            Self::GaussianPsf { radius, .. } | Self::UniformDisc { radius } => radius,
        }
    }

    fn validate(&self) -> Result<()> {
        let r = self.radius();
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid("radius", format!("must be > 0, got {r}")));
        }
        if let Self::GaussianPsf { sigma, .. } = self {
            sigma.validate()?;
        }
        Ok(())
    }

    #[inline]
    pub fn pdf(&self, phi: f64, e: f64) -> f64 {
        match *self {
            Self::UniformDisc { radius } => {
                if (0.0..=radius).contains(&phi) {
                    2.0 * phi / (radius * radius)
                } else {
                    0.0
                }
            }
            Self::GaussianPsf { sigma, radius } => {
                if !(0.0..=radius).contains(&phi) {
                    return 0.0;
                }
                let s = sigma.sigma(e);
                let s2 = s * s;
                let mass = -(-0.5 * radius * radius / s2).exp_m1();
                phi / s2 * (-0.5 * phi * phi / s2).exp() / mass
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, e: f64, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match *self {
            Self::UniformDisc { radius } => radius * u.sqrt(),
            Self::GaussianPsf { sigma, radius } => {
                let s = sigma.sigma(e);
                let mass = -(-0.5 * radius * radius / (s * s)).exp_m1();
                let phi = s * (-2.0 * (-u * mass).ln_1p()).sqrt();
                phi.min(radius)
            }
        }
    }

    /// Angles where the integrand changes character, for quadrature splitting.
    pub fn breakpoints(&self, e: f64) -> Vec<f64> {
        match *self {
            Self::UniformDisc { radius } => vec![radius],
            Self::GaussianPsf { sigma, radius } => {
                let s = sigma.sigma(e);
                let mut v: Vec<f64> = [0.5, 1.0, 2.0, 4.0, 8.0]
                    .iter()
                    .map(|k| k * s)
                    .filter(|&x| x < radius)
                    .collect();
                v.push(radius);
                v
            }
        }
    }
}

/// Density of `z = (E, phi)` for one emission class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxDensity {
    pub energy: EnergySpectrum,
    pub angle: AngleConditional,
}

impl AuxDensity {
    #[inline]
    pub fn pdf(&self, e: f64, phi: f64) -> f64 {
        let fe = self.energy.pdf(e);
        if fe == 0.0 {
            return 0.0;
        }
        fe * self.angle.pdf(phi, e)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let e = self.energy.sample(rng);
        (e, self.angle.sample(e, rng))
    }
}

/// Source and background densities of the auxiliary variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPair")]
pub struct AuxDensityPair {
    pub source: AuxDensity,
    pub background: AuxDensity,
}

#[derive(Deserialize)]
struct RawPair {
    source: AuxDensity,
    background: AuxDensity,
}

impl TryFrom<RawPair> for AuxDensityPair {
    type Error = Error;
    fn try_from(raw: RawPair) -> Result<Self> {
        Self::new(raw.source, raw.background)
    }
}

/// Normalization tolerance checked at construction.
pub const NORMALIZATION_TOL: f64 = 1e-6;

pub(crate) const AXIS_FLOOR: f64 = 1e-150;

impl AuxDensityPair {
    /// Validates parameters and checks by quadrature that both densities
    /// integrate to one.
    pub fn new(source: AuxDensity, background: AuxDensity) -> Result<Self> {
        for d in [&source, &background] {
            d.energy.validate()?;
            d.angle.validate()?;
        }
        let pair = Self { source, background };
        let q = Quadrature::with_rtol(1e-8);
        for (name, d) in [("source", &source), ("background", &background)] {
            let total = pair.integrate_with(&q, &[], &[], |e, phi, _, _| d.pdf(e, phi))?;
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(invalid(
                    "densities",
                    format!("{name} density integrates to {total}, not 1"),
                ));
            }
        }
        Ok(pair)
    }

    pub fn energy_range(&self) -> (f64, f64) {
        let (a, b) = self.source.energy.range();
        let (c, d) = self.background.energy.range();
        (a.min(c), b.max(d))
    }

    pub fn max_radius(&self) -> f64 {
        self.source
            .angle
            .radius()
            .max(self.background.angle.radius())
    }

    /// `(f_S(z), f_B(z))`.
    #[inline]
    pub fn pdfs(&self, e: f64, phi: f64) -> (f64, f64) {
        (self.source.pdf(e, phi), self.background.pdf(e, phi))
    }

    /// `(f_S, f_B)` with `phi` floored at a tiny positive angle, so that
    /// density ratios stay defined on the axis where both vanish.
    #[inline]
    pub fn pdfs_for_ratio(&self, e: f64, phi: f64) -> (f64, f64) {
        self.pdfs(e, if phi == 0.0 { AXIS_FLOOR } else { phi })
    }

    /// Integrates `g(E, phi, f_S, f_B)` over the union of both supports.
    pub fn integrate_with<G>(
        &self,
        q: &Quadrature,
        e_breaks: &[f64],
        phi_breaks: &[f64],
        g: G,
    ) -> Result<f64>
    where
        G: Fn(f64, f64, f64, f64) -> f64,
    {
        let (e_lo, e_hi) = self.energy_range();
        let mut eb: Vec<f64> = e_breaks.to_vec();
        for s in [self.source.energy.range(), self.background.energy.range()] {
            eb.push(s.0);
            eb.push(s.1);
        }
        let r_max = self.max_radius();
        q.integrate_2d(
            |e, phi| {
                let (fs, fb) = self.pdfs(e, phi);
                if fs == 0.0 && fb == 0.0 {
                    0.0
                } else {
                    g(e, phi, fs, fb)
                }
            },
            (e_lo, e_hi),
            &eb,
            |_| (0.0, r_max),
            |e| {
                let mut v = self.source.angle.breakpoints(e);
                v.extend(self.background.angle.breakpoints(e));
                v.extend_from_slice(phi_breaks);
                v
            },
        )
    }
}

/// Disc-shaped region of interest around a point source on a uniform
/// background.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskGeometry {
    pub radius: f64,
    /// Background rate per unit solid angle.
    pub rho: f64,
    /// Source photon rate.
    pub alpha_rate: f64,
    pub psf: SigmaModel,
}

impl DiskGeometry {
    pub fn new(radius: f64, rho: f64, alpha_rate: f64, psf: SigmaModel) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("radius", format!("must be > 0, got {radius}")));
        }
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(invalid("rho", format!("must be >= 0, got {rho}")));
        }
        if !(alpha_rate > 0.0 && alpha_rate.is_finite()) {
            return Err(invalid(
                "alpha_rate",
                format!("must be > 0, got {alpha_rate}"),
            ));
        }
        psf.validate()?;
        Ok(Self {
            radius,
            rho,
            alpha_rate,
            psf,
        })
    }

    /// Geometry with constant PSF width `sigma` whose disc radius makes the
    /// source fraction equal `theta` at background strength `xi`.
    pub fn from_xi(sigma: f64, xi: f64, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(invalid("theta", format!("must be in (0, 1), got {theta}")));
        }
        if !(xi > 0.0 && sigma > 0.0) {
            return Err(invalid("xi", "xi and sigma must be > 0"));
        }
        let beta = xi / (sigma * sigma);
        let radius = (2.0 * (1.0 - theta) / (theta * beta)).sqrt();
        let alpha_rate = 1.0;
        let rho = beta * alpha_rate / std::f64::consts::TAU;
        Self::new(radius, rho, alpha_rate, SigmaModel::constant(sigma))
    }

    /// Background strength relative to the source, `2 pi rho / alpha`.
    pub fn beta(&self) -> f64 {
        std::f64::consts::TAU * self.rho / self.alpha_rate
    }

    /// Total rate collected in the disc.
    pub fn mu(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius * self.rho + self.alpha_rate
    }

    pub fn theta(&self) -> f64 {
        self.alpha_rate / self.mu()
    }

    pub fn sigma(&self, e: f64) -> f64 {
        self.psf.sigma(e)
    }

    /// Dimensionless weight-decay parameter `beta * sigma(E)^2`.
    pub fn xi(&self, e: f64) -> f64 {
        let s = self.sigma(e);
        self.beta() * s * s
    }

    /// Gaussian-PSF source over a uniform-disc background.
    pub fn densities(
        &self,
        source_spectrum: EnergySpectrum,
        background_spectrum: EnergySpectrum,
    ) -> Result<AuxDensityPair> {
        AuxDensityPair::new(
            AuxDensity {
                energy: source_spectrum,
                angle: AngleConditional::GaussianPsf {
                    sigma: self.psf,
                    radius: self.radius,
                },
            },
            AuxDensity {
                energy: background_spectrum,
                angle: AngleConditional::UniformDisc {
                    radius: self.radius,
                },
            },
        )
    }
}
