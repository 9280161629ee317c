//! Mission runner: steps the world to completion and delivers every report.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::thread;
use std::time::Duration;

use artemis_core::models::Classifier;
use artemis_core::VictimReport;
use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;
use crate::sensor::{NoisySensor, Sensor};
use crate::sink::ReportSink;
use crate::world::World;
use crate::{Result, SimError};

/// Exponential backoff between delivery attempts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub base_ms: u64,
    pub factor: u32,
    pub max_attempts: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            base_ms: 100,
            factor: 2,
            max_attempts: 5,
        }
    }
}

impl RetryPolicy {
    /// Wait before attempt `attempt + 1`, for `attempt >= 1`.
    pub fn delay(&self, attempt: u32) -> Duration {
        let factor = u64::from(self.factor).saturating_pow(attempt.saturating_sub(1));
        Duration::from_millis(self.base_ms.saturating_mul(factor))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionConfig {
    /// Seconds per step.
    pub step_dt: f64,
    pub max_steps: u64,
    pub retry: RetryPolicy,
}

impl Default for MissionConfig {
    fn default() -> Self {
        MissionConfig {
            step_dt: 1.0,
            max_steps: 20_000,
            retry: RetryPolicy::default(),
        }
    }
}

/// One line of the mission log: the report plus its delivery outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub step: u64,
    #[serde(flatten)]
    pub report: VictimReport,
    pub delivered: bool,
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionLog {
    /// In emission order.
    pub entries: Vec<LogEntry>,
    pub steps: u64,
    /// Whether every victim was reported before `max_steps`.
    pub complete: bool,
}

impl MissionLog {
    pub fn reports(&self) -> impl Iterator<Item = &VictimReport> {
        self.entries.iter().map(|e| &e.report)
    }

    pub fn undelivered(&self) -> usize {
        self.entries.iter().filter(|e| !e.delivered).count()
    }

    /// JSON-lines, one report per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("log entries serialize"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io = |source| SimError::Io {
            path: path.to_owned(),
            source,
        };
        let mut file = fs::File::create(path).map_err(io)?;
        file.write_all(self.to_jsonl().as_bytes()).map_err(io)?;
        file.sync_all().map_err(io)
    }
}

pub fn run_mission(
    scenario: &Scenario,
    model: &dyn Classifier,
    sink: &mut dyn ReportSink,
    config: &MissionConfig,
) -> Result<MissionLog> {
    let sensor = NoisySensor {
        sigmas: scenario.sensor_noise.clone(),
    };
    run_mission_with_sensor(scenario, model, &sensor, sink, config)
}

pub fn run_mission_with_sensor(
    scenario: &Scenario,
    model: &dyn Classifier,
    sensor: &dyn Sensor,
    sink: &mut dyn ReportSink,
    config: &MissionConfig,
) -> Result<MissionLog> {
    if !(config.step_dt > 0.0 && config.step_dt.is_finite()) {
        return Err(SimError::invalid("step_dt", "must be > 0"));
    }
    if config.retry.max_attempts == 0 {
        return Err(SimError::invalid("retry.max_attempts", "must be >= 1"));
    }
    scenario.validate()?;
    let mut world = World::new(scenario);
    let mut entries = Vec::new();
    while !world.all_reported() && world.steps() < config.max_steps {
        for report in world.step_with_sensor(config.step_dt, model, sensor) {
            let (attempts, error) = deliver_with_retry(sink, &report, &config.retry);
            if let Some(e) = &error {
                log::warn!("report {} undelivered after {attempts} attempt(s): {e}", report.report_id);
            }
            entries.push(LogEntry {
                step: world.steps(),
                report,
                delivered: error.is_none(),
                attempts,
                error,
            });
        }
    }
    Ok(MissionLog {
        entries,
        steps: world.steps(),
        complete: world.all_reported(),
    })
}

fn deliver_with_retry(sink: &mut dyn ReportSink, report: &VictimReport, policy: &RetryPolicy) -> (u32, Option<String>) {
    let mut attempt = 0;
    loop {
        attempt += 1;
        match sink.deliver(report) {
            Ok(()) => return (attempt, None),
            Err(e) if !e.is_retryable() || attempt >= policy.max_attempts => return (attempt, Some(e.to_string())),
            Err(e) => {
                log::debug!("delivery attempt {attempt} for {} failed: {e}", report.report_id);
                thread::sleep(policy.delay(attempt));
            }
        }
    }
}
