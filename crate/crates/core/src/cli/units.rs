//! Physical quantities in configuration files.
//!
//! Every dimensional value is written as `{"value": x, "unit": "..."}` and
//! converted to the internal units: seconds, hertz, MeV and degrees.

use serde::{Deserialize, Serialize};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Time,
    Frequency,
    FrequencyDerivative,
    Rate,
    Energy,
    Angle,
}

impl Dimension {
    fn name(self) -> &'static str {
        match self {
            Self::Time => "time",
            Self::Frequency => "frequency",
            Self::FrequencyDerivative => "frequency derivative",
            Self::Rate => "rate",
            Self::Energy => "energy",
            Self::Angle => "angle",
        }
    }

    fn table(self) -> &'static [(&'static str, f64)] {
        match self {
            Self::Time => &[
                ("s", 1.0),
                ("ms", 1e-3),
                ("us", 1e-6),
                ("ks", 1e3),
                ("min", 60.0),
                ("h", 3600.0),
                ("day", 86400.0),
            ],
            Self::Frequency => &[("Hz", 1.0), ("1/s", 1.0), ("mHz", 1e-3), ("kHz", 1e3)],
            Self::FrequencyDerivative => &[("Hz/s", 1.0), ("1/s2", 1.0), ("Hz/day", 1.0 / 86400.0)],
            Self::Rate => &[
                ("1/s", 1.0),
                ("Hz", 1.0),
                ("1/ks", 1e-3),
                ("1/h", 1.0 / 3600.0),
                ("1/day", 1.0 / 86400.0),
            ],
            Self::Energy => &[
                ("MeV", 1.0),
                ("eV", 1e-6),
                ("keV", 1e-3),
                ("GeV", 1e3),
                ("TeV", 1e6),
            ],
            Self::Angle => &[
                ("deg", 1.0),
                ("rad", 180.0 / std::f64::consts::PI),
                ("arcmin", 1.0 / 60.0),
                ("arcsec", 1.0 / 3600.0),
            ],
        }
    }

    /// Factor converting one `unit` into internal units.
    pub fn factor(self, unit: &str, field: &str) -> Result<f64, CliError> {
        self.table()
            .iter()
            .find(|(u, _)| *u == unit)
            .map(|&(_, f)| f)
            .ok_or_else(|| {
                let known: Vec<&str> = self.table().iter().map(|(u, _)| *u).collect();
                CliError::Config(format!(
                    "{field}: unknown {} unit `{unit}` (expected one of {})",
                    self.name(),
                    known.join(", ")
                ))
            })
    }
}

/// A value with its unit, as written in the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    pub fn new(value: f64, unit: &str) -> Self {
        Self {
            value,
            unit: unit.to_string(),
        }
    }

    /// Value in internal units.
    pub fn to(&self, dim: Dimension, field: &str) -> Result<f64, CliError> {
        if !self.value.is_finite() {
            return Err(CliError::Config(format!("{field}: value must be finite")));
        }
        Ok(self.value * dim.factor(&self.unit, field)?)
    }
}

/// Background surface density, unit written as `<rate>/<angle>2`
/// (for example `1/s/deg2`).
pub fn surface_rate(q: &Quantity, field: &str) -> Result<f64, CliError> {
    let bad = || {
        CliError::Config(format!(
            "{field}: unit `{}` must look like `1/s/deg2`",
            q.unit
        ))
    };
    let (rate, area) = q.unit.rsplit_once('/').ok_or_else(bad)?;
    let angle = area.strip_suffix('2').ok_or_else(bad)?;
    let r = Dimension::Rate.factor(rate, field)?;
    let a = Dimension::Angle.factor(angle, field)?;
    if !q.value.is_finite() {
        return Err(CliError::Config(format!("{field}: value must be finite")));
    }
    Ok(q.value * r / (a * a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert_eq!(
            Quantity::new(2.0, "ks").to(Dimension::Time, "t").unwrap(),
            2000.0
        );
        assert_eq!(
            Quantity::new(500.0, "keV")
                .to(Dimension::Energy, "e")
                .unwrap(),
            0.5
        );
        assert_eq!(
            Quantity::new(30.0, "arcmin")
                .to(Dimension::Angle, "a")
                .unwrap(),
            0.5
        );
        let r = surface_rate(&Quantity::new(4.0, "1/s/arcmin2"), "rho").unwrap();
        assert!((r - 4.0 * 3600.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_unit_names_the_field() {
        let err = Quantity::new(1.0, "parsec")
            .to(Dimension::Angle, "densities.radius")
            .unwrap_err();
        assert!(err.to_string().contains("densities.radius"));
    }
}
