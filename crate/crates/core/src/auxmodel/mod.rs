//! Auxiliary-variable model: densities of `z = (E, phi)` for source and
//! background photons, weight functions built from them, and the weight
//! moments that control detection efficiency.

mod density;
mod weight;

pub use density::{
    AngleConditional, AuxDensity, AuxDensityPair, DiskGeometry, EnergySpectrum, SigmaModel,
    NORMALIZATION_TOL,
};
pub use weight::{
    correlation_efficiency, cut_weight, fisher_information, optimal_efficiency,
    optimal_efficiency_with, optimal_weight, psf_gaussian_weight, weight_efficiency,
    weight_moments, weight_moments_with, CustomWeight, CutRegion, PiecewiseWeight, WeightFunction,
    WeightMoments,
};
