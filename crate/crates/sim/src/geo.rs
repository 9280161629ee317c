//! Planar approximation of a small field: metres east (`x`) and north (`y`)
//! of the field's south-west corner.

use artemis_core::report::GeoPoint;
use serde::{Deserialize, Serialize};

/// Mean Earth radius (IUGG), metres.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Moves at most `max_step` towards `target`; lands on it exactly when in reach.
    pub fn step_towards(self, target: Point, max_step: f64) -> Point {
        let d = self.distance(target);
        if d <= max_step {
            return target;
        }
        let f = max_step / d;
        Point::new(self.x + (target.x - self.x) * f, self.y + (target.y - self.y) * f)
    }
}

/// Equirectangular projection about a fixed origin, scaled at a reference latitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    origin: GeoPoint,
    cos_lat: f64,
}

impl LocalFrame {
    pub fn new(origin: GeoPoint, reference_lat: f64) -> Self {
        LocalFrame {
            origin,
            cos_lat: reference_lat.to_radians().cos(),
        }
    }

    pub fn to_local(&self, p: GeoPoint) -> Point {
        Point::new(
            EARTH_RADIUS_M * (p.lon - self.origin.lon).to_radians() * self.cos_lat,
            EARTH_RADIUS_M * (p.lat - self.origin.lat).to_radians(),
        )
    }

    pub fn to_geo(&self, p: Point) -> GeoPoint {
        GeoPoint {
            lat: self.origin.lat + (p.y / EARTH_RADIUS_M).to_degrees(),
            lon: self.origin.lon + (p.x / (EARTH_RADIUS_M * self.cos_lat)).to_degrees(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_degree_of_latitude() {
        let frame = LocalFrame::new(GeoPoint { lat: 0.0, lon: 0.0 }, 0.0);
        let p = frame.to_local(GeoPoint { lat: 1.0, lon: 1.0 });
        let expected = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
        assert!((p.y - expected).abs() < 1e-6);
        assert!((p.x - expected).abs() < 1e-6);
    }

    #[test]
    fn projection_round_trips() {
        let frame = LocalFrame::new(GeoPoint { lat: 39.1, lon: -84.5 }, 39.1);
        let g = GeoPoint { lat: 39.1012, lon: -84.4987 };
        let back = frame.to_geo(frame.to_local(g));
        assert!((back.lat - g.lat).abs() < 1e-12 && (back.lon - g.lon).abs() < 1e-12);
    }

    #[test]
    fn stepping_stops_at_target() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(3.0, 4.0);
        assert_eq!(a.step_towards(b, 10.0), b);
        let mid = a.step_towards(b, 2.5);
        assert!((mid.x - 1.5).abs() < 1e-12 && (mid.y - 2.0).abs() < 1e-12);
    }
}
