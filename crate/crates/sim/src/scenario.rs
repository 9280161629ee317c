//! Scenario files: the field, its victims with ground-truth vitals, and the robots.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use artemis_core::data::{Feature, NoiseSigmas};
use artemis_core::{GeoPoint, VitalSigns};
use serde::{Deserialize, Serialize};

use crate::geo::LocalFrame;
use crate::{Result, SimError};

const DEMO: &str = include_str!("../scenarios/demo.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldBounds {
    pub min_lat: f64,
    pub max_lat: f64,
    pub min_lon: f64,
    pub max_lon: f64,
}

impl FieldBounds {
    pub fn contains(&self, p: GeoPoint) -> bool {
        p.lat >= self.min_lat && p.lat <= self.max_lat && p.lon >= self.min_lon && p.lon <= self.max_lon
    }

    /// Local frame anchored at the south-west corner, scaled at the mid latitude.
    pub fn frame(&self) -> LocalFrame {
        LocalFrame::new(
            GeoPoint {
                lat: self.min_lat,
                lon: self.min_lon,
            },
            (self.min_lat + self.max_lat) / 2.0,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VictimSpec {
    pub id: String,
    pub position: GeoPoint,
    /// Ground truth the contact sensors measure (with noise).
    pub vitals: VitalSigns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub id: String,
    pub start: GeoPoint,
    /// m/s
    pub speed: f64,
    /// m
    pub detection_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub bounds: FieldBounds,
    pub victims: Vec<VictimSpec>,
    pub robots: Vec<RobotSpec>,
    #[serde(default = "default_sensor_noise")]
    pub sensor_noise: NoiseSigmas,
    pub seed: u64,
    /// Wall-clock time of mission step 0, ms since the Unix epoch.
    #[serde(default)]
    pub start_time_ms: i64,
}

/// Consumer-grade contact sensor noise.
pub fn default_sensor_noise() -> NoiseSigmas {
    NoiseSigmas {
        temperature: 0.4,
        heart_rate: 3.0,
        resp_rate: 1.0,
        o2_sat: 1.5,
        sbp: 4.0,
        dbp: 3.0,
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Checks every invariant; the first violation is reported with its field path.
    pub fn validate(&self) -> Result<()> {
        let b = &self.bounds;
        let finite = [b.min_lat, b.max_lat, b.min_lon, b.max_lon].iter().all(|v| v.is_finite());
        if !finite || !(b.min_lat < b.max_lat && b.min_lon < b.max_lon) {
            return Err(SimError::invalid("bounds", "min must be below max on both axes"));
        }
        if b.min_lat < -90.0 || b.max_lat > 90.0 || b.min_lon < -180.0 || b.max_lon > 180.0 {
            return Err(SimError::invalid("bounds", "outside valid latitude/longitude ranges"));
        }
        for f in Feature::ALL {
            let sigma = self.sensor_noise.get(f);
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(SimError::invalid(
                    format!("sensor_noise.{}", field_name(f)),
                    format!("sigma {sigma} must be finite and >= 0"),
                ));
            }
        }

        let mut ids = HashSet::new();
        for (i, v) in self.victims.iter().enumerate() {
            let at = format!("victims[{i}]");
            if v.id.trim().is_empty() {
                return Err(SimError::invalid(format!("{at}.id"), "must not be empty"));
            }
            if !ids.insert(v.id.as_str()) {
                return Err(SimError::invalid(format!("{at}.id"), format!("duplicate victim id {:?}", v.id)));
            }
            if !b.contains(v.position) {
                return Err(SimError::invalid(format!("{at}.position"), "outside field bounds"));
            }
            for f in Feature::ALL {
                let value = v.vitals.get(f);
                if !f.in_bounds(value) || !value.is_finite() {
                    return Err(SimError::invalid(
                        format!("{at}.vitals.{}", field_name(f)),
                        format!("{value} outside plausible range"),
                    ));
                }
            }
        }

        let mut ids = HashSet::new();
        for (i, r) in self.robots.iter().enumerate() {
            let at = format!("robots[{i}]");
            if r.id.trim().is_empty() {
                return Err(SimError::invalid(format!("{at}.id"), "must not be empty"));
            }
            if !ids.insert(r.id.as_str()) {
                return Err(SimError::invalid(format!("{at}.id"), format!("duplicate robot id {:?}", r.id)));
            }
            if !b.contains(r.start) {
                return Err(SimError::invalid(format!("{at}.start"), "outside field bounds"));
            }
            if !(r.speed > 0.0 && r.speed.is_finite()) {
                return Err(SimError::invalid(format!("{at}.speed"), "must be > 0"));
            }
            if !(r.detection_radius > 0.0 && r.detection_radius.is_finite()) {
                return Err(SimError::invalid(format!("{at}.detection_radius"), "must be > 0"));
            }
        }
        if !self.victims.is_empty() && self.robots.is_empty() {
            return Err(SimError::invalid("robots", "at least one robot is needed to find victims"));
        }
        Ok(())
    }
}

fn field_name(f: Feature) -> &'static str {
    match f {
        Feature::Temperature => "temperature",
        Feature::HeartRate => "heart_rate",
        Feature::RespRate => "resp_rate",
        Feature::O2Sat => "o2_sat",
        Feature::Sbp => "sbp",
        Feature::Dbp => "dbp",
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.to_owned(),
        source,
    })?;
    let scenario: Scenario = serde_json::from_str(&text).map_err(|source| SimError::Parse {
        path: path.to_owned(),
        source,
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// The bundled 12-victim, 3-robot field of about 200 m × 200 m.
pub fn demo_scenario() -> Scenario {
    Scenario::from_json(DEMO).expect("bundled demo scenario is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> Scenario {
        Scenario::from_json(
            r#"{
                "bounds": {"min_lat": 10.0, "max_lat": 10.001, "min_lon": 20.0, "max_lon": 20.001},
                "victims": [{"id": "v1", "position": {"lat": 10.0005, "lon": 20.0005},
                             "vitals": {"temperature": 98.6, "heart_rate": 75, "resp_rate": 16,
                                        "o2_sat": 98, "sbp": 120, "dbp": 80}}],
                "robots": [{"id": "r1", "start": {"lat": 10.0, "lon": 20.0}, "speed": 1.5, "detection_radius": 15}],
                "seed": 1
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn minimal_file_loads_with_default_noise() {
        let s = minimal();
        assert_eq!(s.victims.len(), 1);
        assert_eq!(s.sensor_noise, default_sensor_noise());
        assert_eq!(s.start_time_ms, 0);
    }

    #[test]
    fn duplicate_victim_id_is_named() {
        let mut s = minimal();
        s.victims.push(s.victims[0].clone());
        let err = s.validate().unwrap_err().to_string();
        assert!(err.contains("victims[1].id") && err.contains("\"v1\""), "{err}");
    }

    #[test]
    fn out_of_bounds_positions_are_rejected() {
        let mut s = minimal();
        s.robots[0].start.lat = 11.0;
        assert!(s.validate().unwrap_err().to_string().starts_with("robots[0].start"));
        let mut s = minimal();
        s.victims[0].position.lon = 19.0;
        assert!(s.validate().unwrap_err().to_string().starts_with("victims[0].position"));
    }

    #[test]
    fn nonpositive_speed_and_radius_are_rejected() {
        let mut s = minimal();
        s.robots[0].speed = 0.0;
        assert!(s.validate().unwrap_err().to_string().starts_with("robots[0].speed"));
        let mut s = minimal();
        s.robots[0].detection_radius = -1.0;
        assert!(s.validate().unwrap_err().to_string().starts_with("robots[0].detection_radius"));
    }

    #[test]
    fn implausible_truth_vitals_are_rejected() {
        let mut s = minimal();
        s.victims[0].vitals.o2_sat = 104.0;
        assert!(s.validate().unwrap_err().to_string().starts_with("victims[0].vitals.o2_sat"));
    }

    #[test]
    fn demo_has_twelve_victims_and_three_robots() {
        let s = demo_scenario();
        assert_eq!(s.victims.len(), 12);
        assert_eq!(s.robots.len(), 3);
    }
}
