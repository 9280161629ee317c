//! Victim report exchanged between field robots and the command server.

use serde::{Deserialize, Serialize};

use crate::data::{Acuity, Feature, VitalSigns};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VictimReport {
    /// Unique per (robot, victim).
    pub report_id: String,
    pub victim_id: String,
    pub robot_id: String,
    pub geotag: GeoPoint,
    pub vitals: VitalSigns,
    pub acuity: Acuity,
    pub probabilities: [f64; Acuity::COUNT],
    /// Milliseconds since the Unix epoch, UTC.
    pub timestamp: i64,
    /// Set when the measurement stayed out of range after a retry.
    #[serde(default)]
    pub sensor_fault: bool,
}

impl VictimReport {
    pub fn report_id_for(robot_id: &str, victim_id: &str) -> String {
        format!("{robot_id}:{victim_id}")
    }

    /// Names every field that violates the report invariants.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errors = Vec::new();
        if self.report_id.trim().is_empty() {
            errors.push("report_id: must not be empty".to_owned());
        }
        if self.victim_id.trim().is_empty() {
            errors.push("victim_id: must not be empty".to_owned());
        }
        if self.robot_id.trim().is_empty() {
            errors.push("robot_id: must not be empty".to_owned());
        }
        if !(self.geotag.lat >= -90.0 && self.geotag.lat <= 90.0) {
            errors.push(format!("geotag.lat: {} outside [-90, 90]", self.geotag.lat));
        }
        if !(self.geotag.lon >= -180.0 && self.geotag.lon <= 180.0) {
            errors.push(format!("geotag.lon: {} outside [-180, 180]", self.geotag.lon));
        }
        for f in Feature::ALL {
            let v = self.vitals.get(f);
            if !v.is_finite() {
                errors.push(format!("vitals.{}: not a finite number", f.column()));
            }
        }
        if self.probabilities.iter().any(|p| !(*p >= 0.0 && *p <= 1.0)) {
            errors.push("probabilities: entries must lie in [0, 1]".to_owned());
        }
        let sum: f64 = self.probabilities.iter().sum();
        if !((sum - 1.0).abs() <= 1e-6) {
            errors.push(format!("probabilities: sum {sum} is not 1"));
        }
        if self.timestamp < 0 {
            errors.push("timestamp: must be non-negative".to_owned());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}
