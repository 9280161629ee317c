#![allow(dead_code)]

use artemis_core::data::Acuity;
use artemis_core::{GeoPoint, VictimReport, VitalSigns};

pub fn report(robot: &str, victim: &str, acuity: u8, timestamp: i64) -> VictimReport {
    let acuity = Acuity::from_level(acuity).unwrap();
    let mut probabilities = [0.05; 5];
    probabilities[acuity.index()] = 0.8;
    VictimReport {
        report_id: VictimReport::report_id_for(robot, victim),
        victim_id: victim.into(),
        robot_id: robot.into(),
        geotag: GeoPoint { lat: 39.1, lon: -84.5 },
        vitals: VitalSigns::normal(),
        acuity,
        probabilities,
        timestamp,
        sensor_fault: false,
    }
}
