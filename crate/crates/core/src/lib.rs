//! Event-weighted score tests for periodicity in photon arrival times.
//!
//! Each photon carries an arrival time and auxiliary data `z = (E, phi)`
//! (energy and angular distance from the source). Weights `w(z)` that
//! favour source photons are folded into the Fourier coefficients
//! `A_n = sum_j w_j exp(2 pi i n phi(t_j))`, and the phase-invariant statistic
//!
//! `Q_T = (1/T) sum_{n != 0} |a_n|^2 |A_n|^2`
//!
//! is calibrated against a weighted chi-square law scaled by `sum_j w_j^2`.
//!
//! Modules:
//! - [`lightcurve`]: light-curve profiles, harmonic templates, phase models.
//! - [`auxmodel`]: auxiliary-variable densities, weight functions, efficiencies.
//! - [`simulator`]: background-plus-source Poisson event streams.
//! - [`detector`]: coefficients, `Q_T`, the score, source-fraction MLE, p-values.
//! - [`power`]: signal-to-noise predictions and Monte Carlo checks.
//! - [`scan`]: frequency-grid scans.
//! - [`cli`]: the `photon-score` command-line front end and file formats.
//!
//! ```
//! use photon_score::prelude::*;
//!
//! let phase = PhaseModel::new(1.0, 0.0, 0.0).unwrap();
//! let events = vec![Event::new(0.25, 1.0, 0.0)];
//! let a = fourier_coefficients(&events, &[1.0], &phase, 1).unwrap();
//! assert!((a[0].im - 1.0).abs() < 1e-15);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod auxmodel;
pub mod cli;
pub mod detector;
pub mod error;
pub mod event;
pub mod lightcurve;
pub mod power;
pub mod quadrature;
pub mod scan;
pub mod simulator;
pub mod stats;
pub mod summation;

pub use error::{Error, Result};

/// Commonly used types and functions.
pub mod prelude {
    pub use crate::auxmodel::{
        correlation_efficiency, cut_weight, optimal_efficiency, optimal_weight,
        psf_gaussian_weight, weight_efficiency, weight_moments, AngleConditional, AuxDensity,
        AuxDensityPair, CutRegion, DiskGeometry, EnergySpectrum, SigmaModel, WeightFunction,
        WeightMoments,
    };
    pub use crate::detector::{
        detect, detect_weighted, estimate_theta, fourier_coefficients, null_moments, p_value,
        qt_statistic, score_at_tau, DetectionResult,
    };
    pub use crate::error::{Error, Result};
    pub use crate::event::{Event, Origin};
    pub use crate::lightcurve::{
        estimate_profile_coeffs, eval_profile, phase_of, template_efficiency, HarmonicTemplate,
        LightCurveProfile, PhaseModel,
    };
    pub use crate::power::{
        empirical_snr, mismatch_factor, predicted_snr, qt_column, threshold_theta, MismatchMode,
        MismatchSetup, MismatchVia, MonteCarloSetup, PowerPrediction,
    };
    pub use crate::scan::{scan, ScanResult, ScanSpec};
    pub use crate::simulator::{derive_seed, expected_count, simulate, RateModel, Sensitivity};
    pub use num_complex::Complex64;
}
