//! Victim registry as a pure fold over committed events.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use artemis_core::data::Acuity;
use artemis_core::VictimReport;
use serde::{Deserialize, Serialize};

use crate::{Result, ServerError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VictimStatus {
    Reported,
    Acknowledged,
    Treated,
}

impl VictimStatus {
    /// The only status reachable from `self`, if any.
    pub fn next(self) -> Option<VictimStatus> {
        match self {
            VictimStatus::Reported => Some(VictimStatus::Acknowledged),
            VictimStatus::Acknowledged => Some(VictimStatus::Treated),
            VictimStatus::Treated => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VictimStatus::Reported => "reported",
            VictimStatus::Acknowledged => "acknowledged",
            VictimStatus::Treated => "treated",
        }
    }
}

impl fmt::Display for VictimStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VictimStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reported" => Ok(VictimStatus::Reported),
            "acknowledged" => Ok(VictimStatus::Acknowledged),
            "treated" => Ok(VictimStatus::Treated),
            other => Err(format!("unknown status {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusChange {
    pub status: VictimStatus,
    /// ms since the Unix epoch
    pub timestamp: i64,
    pub actor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VictimEntry {
    pub victim_id: String,
    /// Most recent report by timestamp.
    pub report: VictimReport,
    pub status: VictimStatus,
    pub responder: Option<String>,
    pub history: Vec<StatusChange>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ReportAdded,
    StatusChanged,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::ReportAdded => "report_added",
            EventKind::StatusChanged => "status_changed",
        }
    }
}

/// One committed change; also one line of the persistence log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerEvent {
    pub id: u64,
    pub kind: EventKind,
    /// Entry state after the change.
    pub payload: VictimEntry,
    /// The ingested report, for `ReportAdded`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_id: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Registry {
    victims: BTreeMap<String, VictimEntry>,
    /// report id → victim id
    reports: HashMap<String, String>,
    last_event_id: u64,
}

impl Registry {
    pub fn last_event_id(&self) -> u64 {
        self.last_event_id
    }

    pub fn len(&self) -> usize {
        self.victims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.victims.is_empty()
    }

    pub fn get(&self, victim_id: &str) -> Option<&VictimEntry> {
        self.victims.get(victim_id)
    }

    /// Victim id already recorded for this report id.
    pub fn seen_report(&self, report_id: &str) -> Option<&str> {
        self.reports.get(report_id).map(String::as_str)
    }

    /// The event ingesting `report`, or `None` when the report id was seen before.
    pub fn prepare_report(&self, report: &VictimReport) -> Result<Option<ServerEvent>> {
        report.validate().map_err(ServerError::Validation)?;
        if self.reports.contains_key(&report.report_id) {
            return Ok(None);
        }
        let payload = match self.victims.get(&report.victim_id) {
            Some(entry) => {
                let mut entry = entry.clone();
                // Ordering on (timestamp, report id) makes the result independent of arrival order.
                let newer = (report.timestamp, &report.report_id) > (entry.report.timestamp, &entry.report.report_id);
                if newer {
                    entry.report = report.clone();
                }
                // The first history record describes the earliest report seen.
                let first = &mut entry.history[0];
                if (report.timestamp, &report.robot_id) < (first.timestamp, &first.actor) {
                    first.timestamp = report.timestamp;
                    first.actor = report.robot_id.clone();
                }
                entry
            }
            None => VictimEntry {
                victim_id: report.victim_id.clone(),
                report: report.clone(),
                status: VictimStatus::Reported,
                responder: None,
                history: vec![StatusChange {
                    status: VictimStatus::Reported,
                    timestamp: report.timestamp,
                    actor: report.robot_id.clone(),
                }],
            },
        };
        Ok(Some(ServerEvent {
            id: self.last_event_id + 1,
            kind: EventKind::ReportAdded,
            payload,
            report_id: Some(report.report_id.clone()),
        }))
    }

    /// The event for a legal transition; `NotFound` or `Conflict` otherwise.
    pub fn prepare_status(&self, victim_id: &str, to: VictimStatus, responder: &str, now_ms: i64) -> Result<ServerEvent> {
        let entry = self
            .victims
            .get(victim_id)
            .ok_or_else(|| ServerError::NotFound(victim_id.to_owned()))?;
        if entry.status.next() != Some(to) {
            return Err(ServerError::Conflict {
                victim: victim_id.to_owned(),
                from: entry.status,
                to,
            });
        }
        let mut payload = entry.clone();
        payload.status = to;
        payload.responder = Some(responder.to_owned());
        payload.history.push(StatusChange {
            status: to,
            timestamp: now_ms,
            actor: responder.to_owned(),
        });
        Ok(ServerEvent {
            id: self.last_event_id + 1,
            kind: EventKind::StatusChanged,
            payload,
            report_id: None,
        })
    }

    /// Folds one committed event into the state.
    pub fn apply(&mut self, event: &ServerEvent) {
        if let Some(report_id) = &event.report_id {
            self.reports.insert(report_id.clone(), event.payload.victim_id.clone());
        }
        self.victims.insert(event.payload.victim_id.clone(), event.payload.clone());
        self.last_event_id = self.last_event_id.max(event.id);
    }

    /// Most severe first, then earliest report, then victim id; filters combine with AND.
    pub fn list(&self, status: Option<VictimStatus>, acuity: Option<Acuity>) -> Vec<VictimEntry> {
        let mut out: Vec<VictimEntry> = self
            .victims
            .values()
            .filter(|e| status.is_none_or(|s| e.status == s))
            .filter(|e| acuity.is_none_or(|a| e.report.acuity == a))
            .cloned()
            .collect();
        out.sort_by(|a, b| {
            a.report
                .acuity
                .cmp(&b.report.acuity)
                .then(a.report.timestamp.cmp(&b.report.timestamp))
                .then_with(|| a.victim_id.cmp(&b.victim_id))
        });
        out
    }
}
