#![allow(dead_code)]

use artemis_core::data::{Acuity, RuleTable};
use artemis_core::models::Classifier;
use artemis_core::{GeoPoint, VitalSigns};
use artemis_sim::{FieldBounds, Point, RobotSpec, Scenario, VictimSpec};

/// Classifies by the default rule table; stands in for a trained model.
pub struct RuleModel(pub RuleTable);

impl Classifier for RuleModel {
    fn scores(&self, vitals: &VitalSigns) -> artemis_core::Result<[f64; Acuity::COUNT]> {
        let mut s = [0.0; Acuity::COUNT];
        s[self.0.classify(vitals).index()] = 1.0;
        Ok(s)
    }
}

pub fn rules() -> RuleModel {
    RuleModel(RuleTable::default())
}

pub fn bounds() -> FieldBounds {
    FieldBounds {
        min_lat: 45.0,
        max_lat: 45.001,
        min_lon: 7.0,
        max_lon: 7.0014,
    }
}

/// Geo position of a local-frame point in [`bounds`].
pub fn at(x: f64, y: f64) -> GeoPoint {
    bounds().frame().to_geo(Point::new(x, y))
}

pub fn victim(id: &str, x: f64, y: f64) -> VictimSpec {
    VictimSpec {
        id: id.into(),
        position: at(x, y),
        vitals: VitalSigns::from_values([101.0, 110.0, 20.0, 93.0, 118.0, 76.0]),
    }
}

pub fn robot(id: &str, x: f64, y: f64) -> RobotSpec {
    RobotSpec {
        id: id.into(),
        start: at(x, y),
        speed: 1.5,
        detection_radius: 15.0,
    }
}

pub fn scenario(victims: Vec<VictimSpec>, robots: Vec<RobotSpec>) -> Scenario {
    Scenario {
        bounds: bounds(),
        victims,
        robots,
        sensor_noise: artemis_core::data::NoiseSigmas::zero(),
        seed: 5,
        start_time_ms: 1_000_000,
    }
}
