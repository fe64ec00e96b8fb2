//! Synthetic photon streams from the background-plus-source Poisson model.
//!
//! Arrivals are drawn by Lewis-Shedler thinning of a homogeneous process at
//! the peak rate. Random numbers come from ChaCha8 with four independent
//! stream ids per seed (arrival gaps, acceptance, labels, auxiliary data), so
//! changing how one stage consumes randomness leaves the others untouched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::auxmodel::AuxDensityPair;
use crate::error::{invalid, Error, Result};
pub use crate::event::{Event, Origin};
use crate::lightcurve::{LightCurveProfile, PhaseModel};
use crate::quadrature::Quadrature;

const STREAM_ARRIVAL: u64 = 1;
const STREAM_ACCEPT: u64 = 2;
const STREAM_LABEL: u64 = 3;
const STREAM_AUX: u64 = 4;

/// Phase grid for bounding the profile maximum.
pub const PROFILE_SCAN_POINTS: usize = 4096;

/// Instrument sensitivity `c(t)` on `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Sensitivity {
    Constant {
        level: f64,
    },
    /// Linear from `start` at `t = 0` to `end` at `t = T`.
    LinearRamp {
        start: f64,
        end: f64,
    },
    /// `level` on `[t_on, t_off)`, zero elsewhere.
    Window {
        t_on: f64,
        t_off: f64,
        level: f64,
    },
    /// Piecewise constant: `levels[k]` between `edges[k - 1]` and `edges[k]`,
    /// with `edges` the increasing interior change times.
    Steps {
        edges: Vec<f64>,
        levels: Vec<f64>,
    },
}

impl Default for Sensitivity {
    fn default() -> Self {
        Self::Constant { level: 1.0 }
    }
}

impl Sensitivity {
    #[inline]
    pub fn eval(&self, t: f64, span: f64) -> f64 {
        match *self {
            Self::Constant { level } => level,
            Self::LinearRamp { start, end } => start + (end - start) * t / span,
            Self::Window { t_on, t_off, level } => {
                if t >= t_on && t < t_off {
                    level
                } else {
                    0.0
                }
            }
            Self::Steps {
                ref edges,
                ref levels,
            } => levels[edges.partition_point(|&e| e <= t)],
        }
    }

    pub fn max(&self) -> f64 {
        match *self {
            Self::Constant { level } | Self::Window { level, .. } => level,
            Self::LinearRamp { start, end } => start.max(end),
            Self::Steps { ref levels, .. } => levels.iter().copied().fold(0.0, f64::max),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Constant { level } => level >= 0.0 && level.is_finite(),
            Self::LinearRamp { start, end } => {
                start >= 0.0 && end >= 0.0 && start.is_finite() && end.is_finite()
            }
            Self::Window { t_on, t_off, level } => {
                level >= 0.0 && level.is_finite() && t_on <= t_off
            }
            Self::Steps {
                ref edges,
                ref levels,
            } => {
                levels.len() == edges.len() + 1
                    && levels.iter().all(|l| *l >= 0.0 && l.is_finite())
                    && edges.iter().all(|e| e.is_finite())
                    && edges.windows(2).all(|w| w[0] < w[1])
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(
                "sensitivity",
                "c(t) must be finite and nonnegative",
            ))
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Self::Window { t_on, t_off, .. } => vec![t_on, t_off],
            Self::Steps { ref edges, .. } => edges.clone(),
            _ => Vec::new(),
        }
    }
}

/// Rate model `lambda(t) = mu c(t) [(1 - theta) + theta nu(phi(t) + tau)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    pub mu: f64,
    pub theta: f64,
    #[serde(default)]
    pub sensitivity: Sensitivity,
    pub profile: LightCurveProfile,
    pub phase: PhaseModel,
    /// Observation span `T`; events fall in `[0, T)`.
    pub span: f64,
}

impl RateModel {
    pub fn new(
        mu: f64,
        theta: f64,
        sensitivity: Sensitivity,
        profile: LightCurveProfile,
        phase: PhaseModel,
        span: f64,
    ) -> Result<Self> {
        let model = Self {
            mu,
            theta,
            sensitivity,
            profile,
            phase,
            span,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(invalid("mu", format!("must be > 0, got {}", self.mu)));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(invalid(
                "theta",
                format!("must be in [0, 1], got {}", self.theta),
            ));
        }
        if !(self.span > 0.0 && self.span.is_finite()) {
            return Err(invalid("span", format!("must be > 0, got {}", self.span)));
        }
        self.sensitivity.validate()?;
        if !self.phase.is_monotone_on(0.0, self.span) {
            return Err(invalid("fdot", "phase must be nondecreasing over the span"));
        }
        Ok(())
    }

    /// `mu0 = mu / T * int_0^T c(t) dt`.
    pub fn mu0(&self) -> f64 {
        expected_count(self) / self.span
    }

    /// Instantaneous rate at `t` for phase offset `tau`.
    #[inline]
    pub fn rate(&self, t: f64, tau: f64) -> f64 {
        let nu = self.profile.eval(self.phase.phase(t) + tau);
        self.mu * self.sensitivity.eval(t, self.span) * ((1.0 - self.theta) + self.theta * nu)
    }

    /// Upper bound on the rate used as the thinning envelope.
    pub fn rate_bound(&self) -> f64 {
        let grid_max = self.profile.grid_max(PROFILE_SCAN_POINTS);
        // |nu'| <= 2 eta sum 2 pi n |g_n| bounds the error of the grid scan.
        let slope: f64 = self
            .profile
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| std::f64::consts::TAU * (k + 1) as f64 * c.norm())
            .sum::<f64>()
            * 2.0
            * self.profile.eta();
        let nu_max = grid_max + 0.5 * slope / PROFILE_SCAN_POINTS as f64;
        self.mu * self.sensitivity.max() * ((1.0 - self.theta) + self.theta * nu_max)
    }
}

/// Expected event count `mu * int_0^T c(t) dt`.
pub fn expected_count(model: &RateModel) -> f64 {
    let q = Quadrature::with_rtol(1e-10);
    let c = &model.sensitivity;
    let span = model.span;
    let integral = q
        .integrate(|t| c.eval(t, span), 0.0, span, &c.breakpoints())
        .expect("sensitivity integrand is piecewise linear");
    model.mu * integral
}

/// Draws one realization of the event stream.
pub fn simulate(
    model: &RateModel,
    densities: &AuxDensityPair,
    tau: f64,
    seed: u64,
) -> Result<Vec<Event>> {
    model.validate()?;
    let lambda_max = model.rate_bound();
    if !lambda_max.is_finite() {
        return Err(Error::NonFiniteRate(format!("rate bound {lambda_max}")));
    }
    if lambda_max <= 0.0 {
        return Ok(Vec::new());
    }
    let stream = |id: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id);
        rng
    };
    let mut arrival = stream(STREAM_ARRIVAL);
    let mut accept = stream(STREAM_ACCEPT);
    let mut label = stream(STREAM_LABEL);
    let mut aux = stream(STREAM_AUX);

    let expected = lambda_max * model.span;
    let mut events = Vec::with_capacity((expected * 0.6) as usize + 16);
    let mut t = 0.0;
    let theta = model.theta;
    loop {
        let u: f64 = arrival.random();
        t += -(1.0 - u).ln() / lambda_max;
        if t >= model.span {
            break;
        }
        let c = model.sensitivity.eval(t, model.span);
        let nu = model.profile.eval(model.phase.phase(t) + tau);
        let mix = (1.0 - theta) + theta * nu;
        let rate = model.mu * c * mix;
        if !rate.is_finite() {
            return Err(Error::NonFiniteRate(format!("rate {rate} at t = {t}")));
        }
        let v: f64 = accept.random();
        if v * lambda_max >= rate {
            continue;
        }
        let p_source = if mix > 0.0 { theta * nu / mix } else { 0.0 };
        let is_source = label.random::<f64>() < p_source;
        let (origin, density) = if is_source {
            (Origin::Source, &densities.source)
        } else {
            (Origin::Background, &densities.background)
        };
        let (energy, angle) = density.sample(&mut aux);
        events.push(Event {
            time: t,
            energy,
            angle,
            origin: Some(origin),
        });
    }
    Ok(events)
}

/// SplitMix64 step, used to derive independent replicate seeds.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
