//! Field robot simulation: a scenario of victims and robots, radius-based
//! detection, noisy contact sensing, on-board classification and report
//! delivery to a sink.

mod error;
pub mod geo;
pub mod mission;
pub mod scenario;
pub mod sensor;
pub mod sink;
pub mod world;

pub use error::{Result, SimError};
pub use geo::{LocalFrame, Point};
pub use mission::{run_mission, run_mission_with_sensor, LogEntry, MissionConfig, MissionLog, RetryPolicy};
pub use scenario::{demo_scenario, load_scenario, FieldBounds, RobotSpec, Scenario, VictimSpec};
pub use sensor::{sense_vitals, NoisySensor, Sensor};
pub use sink::{Collector, HttpSink, ReportSink, SinkError};
pub use world::{simulate_step, RobotMode, RobotState, World, ARRIVAL_RADIUS_M};
