use thiserror::Error;

/// Errors raised by the detection library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("no harmonic content")]
    NoHarmonicContent,

    #[error("profile is negative at phase {phase:.6} (value {value:.3e}); reduce eta")]
    NegativeProfile { phase: f64, value: f64 },

    #[error("z outside support")]
    OutsideSupport,

    #[error("degenerate weight")]
    DegenerateWeight,

    #[error(
        "quadrature did not converge: achieved error {achieved:.3e}, requested {requested:.3e}"
    )]
    Quadrature { achieved: f64, requested: f64 },

    #[error("length mismatch: {events} events but {weights} weights")]
    LengthMismatch { events: usize, weights: usize },

    #[error("theta not identifiable")]
    ThetaNotIdentifiable,

    #[error("no weighted events")]
    NoWeightedEvents,

    #[error("empty event list")]
    EmptyEvents,

    #[error("orthogonal template")]
    OrthogonalTemplate,

    #[error("outside regime: |Delta| = {0} must be < 1")]
    OutsideRegime(f64),

    #[error("non-finite rate: {0}")]
    NonFiniteRate(String),

    #[error("grid of {points} points exceeds the maximum of {max}; narrow the frequency range")]
    GridTooLarge { points: u64, max: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
