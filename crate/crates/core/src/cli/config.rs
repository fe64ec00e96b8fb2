//! JSON configuration shared by all subcommands.
//!
//! Sections: `units`, `model`, `phase`, `densities`, `weight`, `template`,
//! `scan`, `theta`, `span`, `power`. Each subcommand reads only the sections
//! it needs and reports a missing one by name.

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::auxmodel::{
    AngleConditional, AuxDensity, AuxDensityPair, CutRegion, DiskGeometry, EnergySpectrum,
    SigmaModel, WeightFunction,
};
use crate::error::Error;
use crate::lightcurve::{HarmonicTemplate, LightCurveProfile, PhaseModel};
use crate::scan::{FdotAxis, ScanSpec, DEFAULT_MAX_POINTS};
use crate::simulator::{RateModel, Sensitivity};

use super::csvio::ColumnUnits;
use super::units::{surface_rate, Dimension, Quantity};
use super::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub units: UnitsSection,
    pub model: Option<ModelSection>,
    pub phase: Option<PhaseSection>,
    pub densities: Option<DensitySection>,
    pub weight: Option<WeightSection>,
    pub template: Option<TemplateSection>,
    pub scan: Option<ScanSection>,
    /// Source fraction used for detection; estimated when absent.
    pub theta: Option<f64>,
    /// Observation span for detection when there is no `model` section.
    pub span: Option<Quantity>,
    #[serde(default)]
    pub power: PowerSection,
}

/// Units of the energy and angle columns in event files.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsSection {
    #[serde(default = "default_energy_unit")]
    pub energy: String,
    #[serde(default = "default_angle_unit")]
    pub angle: String,
}

fn default_energy_unit() -> String {
    "MeV".into()
}

fn default_angle_unit() -> String {
    "deg".into()
}

impl Default for UnitsSection {
    fn default() -> Self {
        Self {
            energy: default_energy_unit(),
            angle: default_angle_unit(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub mu: Quantity,
    pub theta: f64,
    pub span: Quantity,
    #[serde(default)]
    pub sensitivity: SensitivitySection,
    #[serde(default)]
    pub profile: ProfileSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SensitivitySection {
    #[default]
    Constant,
    Level {
        level: f64,
    },
    LinearRamp {
        start: f64,
        end: f64,
    },
    Window {
        t_on: Quantity,
        t_off: Quantity,
        #[serde(default = "one")]
        level: f64,
    },
    Steps {
        edges: Vec<Quantity>,
        levels: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSection {
    #[default]
    Flat,
    Sinusoid {
        gamma1: f64,
        #[serde(default = "one")]
        eta: f64,
    },
    Fourier {
        #[serde(default = "one")]
        eta: f64,
        /// `[re, im]` of `g_n`, `n = 1..`.
        coeffs: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSection {
    pub f: Quantity,
    pub fdot: Option<Quantity>,
    pub epoch: Option<Quantity>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpectrumSection {
    Flat {
        e_min: Quantity,
        e_max: Quantity,
    },
    PowerLaw {
        index: f64,
        e_min: Quantity,
        e_max: Quantity,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PsfSection {
    Constant {
        sigma: Quantity,
    },
    /// `sigma(E) = sigma_ref (E / e_ref)^-index`.
    PowerLaw {
        sigma_ref: Quantity,
        e_ref: Quantity,
        index: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AngleSection {
    GaussianPsf { psf: PsfSection, radius: Quantity },
    UniformDisc { radius: Quantity },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSection {
    pub energy: SpectrumSection,
    pub angle: AngleSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensitySection {
    /// Gaussian-PSF point source on a uniform background disc.
    Disk {
        radius: Quantity,
        psf: PsfSection,
        /// Background rate per unit solid angle, unit like `1/s/deg2`.
        rho: Quantity,
        alpha_rate: Quantity,
        source_spectrum: SpectrumSection,
        background_spectrum: SpectrumSection,
    },
    Explicit {
        source: ClassSection,
        background: ClassSection,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSection {
    Optimal,
    OptimalNoSpectrum,
    PsfGaussian {
        #[serde(default = "yes")]
        use_spectra: bool,
    },
    Cut {
        phi_max: Option<Quantity>,
        e_lo: Option<Quantity>,
        e_hi: Option<Quantity>,
    },
    Unit,
    /// Per-event weights from the event file's `weight` column.
    Precomputed,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TemplateSection {
    ZM {
        m: usize,
    },
    Rayleigh,
    Amplitudes {
        amps_sq: Vec<f64>,
    },
    /// Proportional to the model's pulsed spectrum.
    Matched,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FdotSection {
    Range {
        lo: Quantity,
        hi: Quantity,
        steps: usize,
    },
    Fixed(Quantity),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub f_lo: Quantity,
    pub f_hi: Quantity,
    pub fdot: Option<FdotSection>,
    pub oversample: Option<f64>,
    pub m: usize,
    pub max_points: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSection {
    /// Largest `m` in the `Z_m` efficiency table.
    pub table_m: Option<usize>,
    /// Signal-to-noise ratio for the threshold source fraction.
    pub target_snr: Option<f64>,
}

/// How per-event weights are obtained.
#[derive(Debug, Clone)]
pub enum WeightChoice {
    Function(WeightFunction),
    Precomputed,
}

/// Validated configuration in internal units.
#[derive(Debug, Clone)]
pub struct Config {
    pub units: ColumnUnits,
    pub model: Option<RateModel>,
    pub phase: Option<PhaseModel>,
    pub densities: Option<AuxDensityPair>,
    pub geometry: Option<DiskGeometry>,
    pub weight: Option<WeightChoice>,
    pub template: Option<HarmonicTemplate>,
    pub scan: Option<ScanSpec>,
    pub theta: Option<f64>,
    pub span: Option<f64>,
    pub power: PowerSection,
}

fn field_error(prefix: &str, e: Error) -> CliError {
    match e {
        Error::InvalidParameter { name, reason } => {
            CliError::Config(format!("{prefix}.{name}: {reason}"))
        }
        other => CliError::Config(format!("{prefix}: {other}")),
    }
}

fn spectrum(s: &SpectrumSection, field: &str) -> Result<EnergySpectrum, CliError> {
    let e = |q: &Quantity, name: &str| q.to(Dimension::Energy, &format!("{field}.{name}"));
    let spec = match s {
        SpectrumSection::Flat { e_min, e_max } => EnergySpectrum::Flat {
            e_min: e(e_min, "e_min")?,
            e_max: e(e_max, "e_max")?,
        },
        SpectrumSection::PowerLaw {
            index,
            e_min,
            e_max,
        } => EnergySpectrum::PowerLaw {
            index: *index,
            e_min: e(e_min, "e_min")?,
            e_max: e(e_max, "e_max")?,
        },
    };
    spec.validate().map_err(|err| field_error(field, err))?;
    Ok(spec)
}

fn psf(p: &PsfSection, field: &str) -> Result<SigmaModel, CliError> {
    Ok(match p {
        PsfSection::Constant { sigma } => {
            SigmaModel::constant(sigma.to(Dimension::Angle, &format!("{field}.sigma"))?)
        }
        PsfSection::PowerLaw {
            sigma_ref,
            e_ref,
            index,
        } => SigmaModel::PowerLaw {
            sigma_ref: sigma_ref.to(Dimension::Angle, &format!("{field}.sigma_ref"))?,
            e_ref: e_ref.to(Dimension::Energy, &format!("{field}.e_ref"))?,
            index: *index,
        },
    })
}

fn angle_conditional(a: &AngleSection, field: &str) -> Result<AngleConditional, CliError> {
    Ok(match a {
        AngleSection::GaussianPsf { psf: p, radius } => AngleConditional::GaussianPsf {
            sigma: psf(p, &format!("{field}.psf"))?,
            radius: radius.to(Dimension::Angle, &format!("{field}.radius"))?,
        },
        AngleSection::UniformDisc { radius } => AngleConditional::UniformDisc {
            radius: radius.to(Dimension::Angle, &format!("{field}.radius"))?,
        },
    })
}

fn class(c: &ClassSection, field: &str) -> Result<AuxDensity, CliError> {
    Ok(AuxDensity {
        energy: spectrum(&c.energy, &format!("{field}.energy"))?,
        angle: angle_conditional(&c.angle, &format!("{field}.angle"))?,
    })
}

fn profile(p: &ProfileSection) -> Result<LightCurveProfile, CliError> {
    let r = match p {
        ProfileSection::Flat => Ok(LightCurveProfile::flat()),
        ProfileSection::Sinusoid { gamma1, eta } => LightCurveProfile::sinusoid(*gamma1, *eta),
        ProfileSection::Fourier { eta, coeffs } => LightCurveProfile::new(
            coeffs
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect(),
            *eta,
        ),
    };
    r.map_err(|e| field_error("model.profile", e))
}

fn check_theta(theta: f64, field: &str) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "{field}: must be in [0, 1], got {theta}"
        )))
    }
}

impl RawConfig {
    pub fn resolve(&self) -> Result<Config, CliError> {
        let units = ColumnUnits {
            energy: Dimension::Energy.factor(&self.units.energy, "units.energy")?,
            angle: Dimension::Angle.factor(&self.units.angle, "units.angle")?,
        };

        let phase = match &self.phase {
            None => None,
            Some(p) => {
                let f = p.f.to(Dimension::Frequency, "phase.f")?;
                let fdot = match &p.fdot {
                    Some(q) => q.to(Dimension::FrequencyDerivative, "phase.fdot")?,
                    None => 0.0,
                };
                let epoch = match &p.epoch {
                    Some(q) => q.to(Dimension::Time, "phase.epoch")?,
                    None => 0.0,
                };
                Some(PhaseModel::new(f, fdot, epoch).map_err(|e| field_error("phase", e))?)
            }
        };

        let model = match &self.model {
            None => None,
            Some(m) => {
                check_theta(m.theta, "model.theta")?;
                let mu = m.mu.to(Dimension::Rate, "model.mu")?;
                let span = m.span.to(Dimension::Time, "model.span")?;
                let sensitivity = match &m.sensitivity {
                    SensitivitySection::Constant => Sensitivity::default(),
                    SensitivitySection::Level { level } => Sensitivity::Constant { level: *level },
                    SensitivitySection::LinearRamp { start, end } => Sensitivity::LinearRamp {
                        start: *start,
                        end: *end,
                    },
                    SensitivitySection::Window { t_on, t_off, level } => Sensitivity::Window {
                        t_on: t_on.to(Dimension::Time, "model.sensitivity.t_on")?,
                        t_off: t_off.to(Dimension::Time, "model.sensitivity.t_off")?,
                        level: *level,
                    },
                    SensitivitySection::Steps { edges, levels } => Sensitivity::Steps {
                        edges: edges
                            .iter()
                            .map(|e| e.to(Dimension::Time, "model.sensitivity.edges"))
                            .collect::<Result<_, _>>()?,
                        levels: levels.clone(),
                    },
                };
                let phase = phase.ok_or_else(|| {
                    CliError::Config("phase: section is required with `model`".into())
                })?;
                Some(
                    RateModel::new(mu, m.theta, sensitivity, profile(&m.profile)?, phase, span)
                        .map_err(|e| field_error("model", e))?,
                )
            }
        };

        let mut geometry = None;
        let mut spectra = None;
        let densities = match &self.densities {
            None => None,
            Some(DensitySection::Disk {
                radius,
                psf: p,
                rho,
                alpha_rate,
                source_spectrum,
                background_spectrum,
            }) => {
                let g = DiskGeometry::new(
                    radius.to(Dimension::Angle, "densities.radius")?,
                    surface_rate(rho, "densities.rho")?,
                    alpha_rate.to(Dimension::Rate, "densities.alpha_rate")?,
                    psf(p, "densities.psf")?,
                )
                .map_err(|e| field_error("densities", e))?;
                let s = spectrum(source_spectrum, "densities.source_spectrum")?;
                let b = spectrum(background_spectrum, "densities.background_spectrum")?;
                geometry = Some(g);
                spectra = Some((s, b));
                Some(g.densities(s, b).map_err(|e| field_error("densities", e))?)
            }
            Some(DensitySection::Explicit { source, background }) => Some(
                AuxDensityPair::new(
                    class(source, "densities.source")?,
                    class(background, "densities.background")?,
                )
                .map_err(|e| field_error("densities", e))?,
            ),
        };

        if let Some(t) = self.theta {
            check_theta(t, "theta")?;
        }
        // Placeholder fraction for theta-dependent weights until detection
        // substitutes the given or estimated value.
        let provisional = self
            .theta
            .or(model.as_ref().map(|m| m.theta))
            .unwrap_or(0.5);
        let need_densities = |kind: &str| {
            densities.ok_or_else(|| {
                CliError::Config(format!("weight: kind `{kind}` needs a `densities` section"))
            })
        };
        let weight = match &self.weight {
            None => None,
            Some(WeightSection::Unit) => Some(WeightChoice::Function(WeightFunction::Unit)),
            Some(WeightSection::Precomputed) => Some(WeightChoice::Precomputed),
            Some(WeightSection::Optimal) => Some(WeightChoice::Function(
                WeightFunction::optimal(provisional, need_densities("optimal")?)
                    .map_err(|e| field_error("weight", e))?,
            )),
            Some(WeightSection::OptimalNoSpectrum) => Some(WeightChoice::Function(
                WeightFunction::optimal_no_spectrum(
                    provisional,
                    need_densities("optimal-no-spectrum")?,
                )
                .map_err(|e| field_error("weight", e))?,
            )),
            Some(WeightSection::PsfGaussian { use_spectra }) => {
                let g = geometry.ok_or_else(|| {
                    CliError::Config(
                        "weight: kind `psf-gaussian` needs `densities` of kind `disk`".into(),
                    )
                })?;
                Some(WeightChoice::Function(WeightFunction::PsfGaussian {
                    geometry: g,
                    spectra: if *use_spectra { spectra } else { None },
                }))
            }
            Some(WeightSection::Cut {
                phi_max,
                e_lo,
                e_hi,
            }) => {
                let get = |q: &Option<Quantity>, dim, name: &str, default: f64| match q {
                    Some(q) => q.to(dim, &format!("weight.{name}")),
                    None => Ok(default),
                };
                let cut = CutRegion::new(
                    get(e_lo, Dimension::Energy, "e_lo", f64::NEG_INFINITY)?,
                    get(e_hi, Dimension::Energy, "e_hi", f64::INFINITY)?,
                    get(phi_max, Dimension::Angle, "phi_max", f64::INFINITY)?,
                )
                .map_err(|e| field_error("weight", e))?;
                Some(WeightChoice::Function(WeightFunction::Cut(cut)))
            }
        };

        let template = match &self.template {
            None => None,
            Some(t) => Some(
                match t {
                    TemplateSection::ZM { m } => HarmonicTemplate::z_m(*m),
                    TemplateSection::Rayleigh => Ok(HarmonicTemplate::rayleigh()),
                    TemplateSection::Amplitudes { amps_sq } => {
                        HarmonicTemplate::new(amps_sq.clone())
                    }
                    TemplateSection::Matched => {
                        let m = model.as_ref().ok_or_else(|| {
                            CliError::Config(
                                "template: kind `matched` needs a `model` section".into(),
                            )
                        })?;
                        HarmonicTemplate::matched(&m.profile)
                    }
                }
                .map_err(|e| field_error("template", e))?,
            ),
        };

        let scan = match &self.scan {
            None => None,
            Some(s) => {
                let fdot = match &s.fdot {
                    None => FdotAxis::Fixed(0.0),
                    Some(FdotSection::Fixed(q)) => {
                        FdotAxis::Fixed(q.to(Dimension::FrequencyDerivative, "scan.fdot")?)
                    }
                    Some(FdotSection::Range { lo, hi, steps }) => FdotAxis::Range {
                        lo: lo.to(Dimension::FrequencyDerivative, "scan.fdot.lo")?,
                        hi: hi.to(Dimension::FrequencyDerivative, "scan.fdot.hi")?,
                        steps: *steps,
                    },
                };
                let spec = ScanSpec {
                    f_lo: s.f_lo.to(Dimension::Frequency, "scan.f_lo")?,
                    f_hi: s.f_hi.to(Dimension::Frequency, "scan.f_hi")?,
                    fdot,
                    oversample: s.oversample.unwrap_or(10.0),
                    m: s.m,
                    max_points: s.max_points.unwrap_or(DEFAULT_MAX_POINTS),
                };
                spec.validate().map_err(|e| match e {
                    Error::InvalidParameter { name, reason } => {
                        CliError::Config(format!("{name}: {reason}"))
                    }
                    other => CliError::Config(format!("scan: {other}")),
                })?;
                Some(spec)
            }
        };

        let span = match &self.span {
            Some(q) => {
                let v = q.to(Dimension::Time, "span")?;
                if !(v > 0.0) {
                    return Err(CliError::Config(format!("span: must be > 0, got {v}")));
                }
                Some(v)
            }
            None => model.as_ref().map(|m| m.span),
        };

        if let Some(0) = self.power.table_m {
            return Err(CliError::Config("power.table_m: must be >= 1".into()));
        }
        if let Some(t) = self.power.target_snr {
            if !(t >= 0.0) {
                return Err(CliError::Config(format!(
                    "power.target_snr: must be >= 0, got {t}"
                )));
            }
        }

        Ok(Config {
            units,
            model,
            phase,
            densities,
            geometry,
            weight,
            template,
            scan,
            theta: self.theta,
            span,
            power: self.power.clone(),
        })
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        raw.resolve()
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn require<'a, T>(&self, section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        section.as_ref().ok_or_else(|| {
            CliError::Config(format!("{name}: section is required for this command"))
        })
    }
}
