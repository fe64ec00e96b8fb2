#![allow(dead_code)]

use photon_score::auxmodel::{AuxDensityPair, DiskGeometry, EnergySpectrum};
use photon_score::lightcurve::{LightCurveProfile, PhaseModel};
use photon_score::simulator::{RateModel, Sensitivity};

pub const SOURCE_SPECTRUM: EnergySpectrum = EnergySpectrum::PowerLaw {
    index: 2.0,
    e_min: 100.0,
    e_max: 10_000.0,
};

pub const BACKGROUND_SPECTRUM: EnergySpectrum = EnergySpectrum::PowerLaw {
    index: 2.7,
    e_min: 100.0,
    e_max: 10_000.0,
};

/// Unit-width PSF on a disc of radius sqrt(18) with xi = 1.
pub fn geometry() -> DiskGeometry {
    DiskGeometry::from_xi(1.0, 1.0, 0.1).unwrap()
}

pub fn densities() -> AuxDensityPair {
    geometry()
        .densities(SOURCE_SPECTRUM, BACKGROUND_SPECTRUM)
        .unwrap()
}

pub fn model(mu: f64, theta: f64, profile: LightCurveProfile, span: f64) -> RateModel {
    RateModel::new(
        mu,
        theta,
        Sensitivity::default(),
        profile,
        PhaseModel::new(1.0, 0.0, 0.0).unwrap(),
        span,
    )
    .unwrap()
}
