use serde::{Deserialize, Serialize};

/// Which process emitted a simulated photon. Detection never reads this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Source,
    Background,
}

/// One photon arrival with its auxiliary measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub energy: f64,
    pub angle: f64,
    /// Simulation truth, `None` for events read from files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Origin>,
}

impl Event {
    pub fn new(time: f64, energy: f64, angle: f64) -> Self {
        Self {
            time,
            energy,
            angle,
            origin: None,
        }
    }
}
