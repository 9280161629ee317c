//! Discrete-time world: robot state machines, detection and claims.

use std::collections::{BTreeMap, BTreeSet};

use artemis_core::data::Acuity;
use artemis_core::models::Classifier;
use artemis_core::{seed, VictimReport, VitalSigns};
use serde::{Deserialize, Serialize};

use crate::geo::{LocalFrame, Point};
use crate::scenario::Scenario;
use crate::sensor::{NoisySensor, Sensor};

/// A robot within this distance of its target starts measuring.
pub const ARRIVAL_RADIUS_M: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "victim", rename_all = "snake_case")]
pub enum RobotMode {
    Scanning,
    Approaching(String),
    Measuring(String),
    Reporting(String),
}

impl RobotMode {
    /// The victim this robot has claimed, if any.
    pub fn target(&self) -> Option<&str> {
        match self {
            RobotMode::Scanning => None,
            RobotMode::Approaching(v) | RobotMode::Measuring(v) | RobotMode::Reporting(v) => Some(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Reading {
    vitals: VitalSigns,
    acuity: Acuity,
    probabilities: [f64; Acuity::COUNT],
    fault: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub id: String,
    pub position: Point,
    pub mode: RobotMode,
    /// Victims this robot has reported.
    pub visited: BTreeSet<String>,
    pub speed: f64,
    pub detection_radius: f64,
    route: Vec<Point>,
    next_waypoint: usize,
    reading: Option<Reading>,
}

#[derive(Debug, Clone, PartialEq)]
struct Victim {
    id: String,
    position: Point,
    vitals: VitalSigns,
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    scenario: Scenario,
    frame: LocalFrame,
    victims: Vec<Victim>,
    /// Sorted by id; processing order within a step.
    robots: Vec<RobotState>,
    /// victim id → robot id
    claims: BTreeMap<String, String>,
    reported: BTreeSet<String>,
    elapsed_ms: i64,
    steps: u64,
}

impl World {
    pub fn new(scenario: &Scenario) -> Self {
        let frame = scenario.bounds.frame();
        let corner = frame.to_local(artemis_core::GeoPoint {
            lat: scenario.bounds.max_lat,
            lon: scenario.bounds.max_lon,
        });
        let victims = scenario
            .victims
            .iter()
            .map(|v| Victim {
                id: v.id.clone(),
                position: frame.to_local(v.position),
                vitals: v.vitals.clone(),
            })
            .collect();
        let mut specs: Vec<_> = scenario.robots.iter().collect();
        specs.sort_by(|a, b| a.id.cmp(&b.id));
        let n = specs.len();
        let robots = specs
            .into_iter()
            .enumerate()
            .map(|(k, r)| RobotState {
                id: r.id.clone(),
                position: frame.to_local(r.start),
                mode: RobotMode::Scanning,
                visited: BTreeSet::new(),
                speed: r.speed,
                detection_radius: r.detection_radius,
                route: sweep_route(k, n, corner, r.detection_radius),
                next_waypoint: 0,
                reading: None,
            })
            .collect();
        World {
            scenario: scenario.clone(),
            frame,
            victims,
            robots,
            claims: BTreeMap::new(),
            reported: BTreeSet::new(),
            elapsed_ms: 0,
            steps: 0,
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn frame(&self) -> &LocalFrame {
        &self.frame
    }

    pub fn robots(&self) -> &[RobotState] {
        &self.robots
    }

    pub fn robot(&self, id: &str) -> Option<&RobotState> {
        self.robots.iter().find(|r| r.id == id)
    }

    /// Victim id → claiming robot id.
    pub fn claims(&self) -> &BTreeMap<String, String> {
        &self.claims
    }

    pub fn reported(&self) -> &BTreeSet<String> {
        &self.reported
    }

    pub fn all_reported(&self) -> bool {
        self.reported.len() == self.victims.len()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn elapsed_ms(&self) -> i64 {
        self.elapsed_ms
    }

    /// Local-frame position of a victim.
    pub fn victim_position(&self, id: &str) -> Option<Point> {
        self.victims.iter().find(|v| v.id == id).map(|v| v.position)
    }

    /// Places a robot; used to set up scenes in tests and tools.
    pub fn set_robot_position(&mut self, robot_id: &str, position: Point) {
        if let Some(r) = self.robots.iter_mut().find(|r| r.id == robot_id) {
            r.position = position;
        }
    }

    /// Unreported, unclaimed victims within the robot's detection radius,
    /// nearest first (ties by victim id).
    pub fn detect(&self, robot: &RobotState) -> Vec<String> {
        let mut hits: Vec<(f64, &str)> = self
            .victims
            .iter()
            .filter(|v| !self.reported.contains(&v.id) && !self.claims.contains_key(&v.id))
            .map(|v| (robot.position.distance(v.position), v.id.as_str()))
            .filter(|(d, _)| *d <= robot.detection_radius)
            .collect();
        hits.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        hits.into_iter().map(|(_, id)| id.to_owned()).collect()
    }

    /// Advances every robot by `dt` seconds using the scenario's noisy sensor.
    pub fn step(&mut self, dt: f64, model: &dyn Classifier) -> Vec<VictimReport> {
        let sensor = NoisySensor {
            sigmas: self.scenario.sensor_noise.clone(),
        };
        self.step_with_sensor(dt, model, &sensor)
    }

    /// Advances every robot by `dt` seconds; robots act in ascending id order,
    /// so the lowest id wins any claim conflict.
    pub fn step_with_sensor(&mut self, dt: f64, model: &dyn Classifier, sensor: &dyn Sensor) -> Vec<VictimReport> {
        if !(dt > 0.0) {
            return Vec::new();
        }
        self.steps += 1;
        self.elapsed_ms += (dt * 1000.0).round() as i64;
        let mut reports = Vec::new();
        for k in 0..self.robots.len() {
            match self.robots[k].mode.clone() {
                RobotMode::Scanning => match self.detect(&self.robots[k]).into_iter().next() {
                    Some(victim) => {
                        self.claims.insert(victim.clone(), self.robots[k].id.clone());
                        self.robots[k].mode = RobotMode::Approaching(victim.clone());
                        self.approach(k, &victim, dt);
                    }
                    None => self.sweep(k, dt),
                },
                RobotMode::Approaching(victim) => self.approach(k, &victim, dt),
                RobotMode::Measuring(victim) => {
                    let reading = self.measure(&victim, model, sensor);
                    let robot = &mut self.robots[k];
                    robot.reading = Some(reading);
                    robot.mode = RobotMode::Reporting(victim);
                }
                RobotMode::Reporting(victim) => {
                    reports.push(self.report(k, &victim));
                    let robot = &mut self.robots[k];
                    robot.visited.insert(victim.clone());
                    robot.mode = RobotMode::Scanning;
                    self.claims.remove(&victim);
                    self.reported.insert(victim);
                }
            }
        }
        reports
    }

    fn approach(&mut self, k: usize, victim: &str, dt: f64) {
        let target = self.victim_position(victim).expect("claimed victim exists");
        let robot = &mut self.robots[k];
        robot.position = robot.position.step_towards(target, robot.speed * dt);
        if robot.position.distance(target) <= ARRIVAL_RADIUS_M {
            robot.mode = RobotMode::Measuring(victim.to_owned());
        }
    }

    fn sweep(&mut self, k: usize, dt: f64) {
        let robot = &mut self.robots[k];
        if robot.route.is_empty() {
            return;
        }
        let waypoint = robot.route[robot.next_waypoint];
        robot.position = robot.position.step_towards(waypoint, robot.speed * dt);
        if robot.position == waypoint {
            robot.next_waypoint = (robot.next_waypoint + 1) % robot.route.len();
        }
    }

    /// One retry on an unusable reading; a second failure is reported as the
    /// most severe acuity with the fault flag set.
    fn measure(&self, victim: &str, model: &dyn Classifier, sensor: &dyn Sensor) -> Reading {
        let index = self.victims.iter().position(|v| v.id == victim).expect("claimed victim exists");
        let truth = &self.victims[index].vitals;
        let stream = seed::derive(self.scenario.seed, seed::stage::SIMULATE);
        let mut last = truth.clone();
        for attempt in 0..2u64 {
            let vitals = sensor.read(truth, seed::derive(stream, 2 * index as u64 + attempt));
            if let Ok(reading) = classify(model, &vitals) {
                return reading;
            }
            log::warn!("sensor fault at victim {victim} (attempt {})", attempt + 1);
            last = vitals;
        }
        let mut probabilities = [0.0; Acuity::COUNT];
        probabilities[Acuity::Resuscitation.index()] = 1.0;
        Reading {
            vitals: last.clamped(),
            acuity: Acuity::Resuscitation,
            probabilities,
            fault: true,
        }
    }

    fn report(&mut self, k: usize, victim: &str) -> VictimReport {
        let robot = &mut self.robots[k];
        let reading = robot.reading.take().expect("reading taken while measuring");
        let spec = self
            .scenario
            .victims
            .iter()
            .find(|v| v.id == victim)
            .expect("claimed victim exists");
        VictimReport {
            report_id: VictimReport::report_id_for(&robot.id, victim),
            victim_id: victim.to_owned(),
            robot_id: robot.id.clone(),
            geotag: spec.position,
            vitals: reading.vitals,
            acuity: reading.acuity,
            probabilities: reading.probabilities,
            timestamp: self.scenario.start_time_ms + self.elapsed_ms,
            sensor_fault: reading.fault,
        }
    }
}

fn classify(model: &dyn Classifier, vitals: &VitalSigns) -> artemis_core::Result<Reading> {
    vitals.check_bounds()?;
    let scores = model.scores(vitals)?;
    let total: f64 = scores.iter().sum();
    if !(total > 0.0) || scores.iter().any(|p| !p.is_finite()) {
        return Err(artemis_core::Error::InvalidConfig("model produced no usable scores".into()));
    }
    Ok(Reading {
        vitals: vitals.clone(),
        acuity: model.predict(vitals)?,
        probabilities: scores.map(|p| p / total),
        fault: false,
    })
}

/// Lawnmower lanes over robot `k`'s share of the field, split into vertical
/// strips. Lanes are one detection radius apart, so every point of the strip
/// lies within one radius of some lane.
fn sweep_route(k: usize, n: usize, corner: Point, radius: f64) -> Vec<Point> {
    let width = corner.x / n as f64;
    let (left, right) = (width * k as f64, width * (k + 1) as f64);
    let mut lanes = Vec::new();
    let mut x = left + radius / 2.0;
    while x < right {
        lanes.push(x);
        x += radius;
    }
    if lanes.is_empty() {
        lanes.push((left + right) / 2.0);
    }
    let mut route = Vec::with_capacity(lanes.len() * 2);
    for (j, &x) in lanes.iter().enumerate() {
        let (from, to) = if j % 2 == 0 { (0.0, corner.y) } else { (corner.y, 0.0) };
        route.push(Point::new(x, from));
        route.push(Point::new(x, to));
    }
    route
}

/// Pure form of [`World::step`].
pub fn simulate_step(world: &World, dt: f64, model: &dyn Classifier) -> (World, Vec<VictimReport>) {
    let mut next = world.clone();
    let reports = next.step(dt, model);
    (next, reports)
}

