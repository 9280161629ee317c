//! The single commit point: every mutation is validated, logged, applied and
//! broadcast while holding one lock, so log order, event ids and feed order agree.

use std::path::Path;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use artemis_core::data::Acuity;
use artemis_core::VictimReport;
use tokio::sync::broadcast;

use crate::log_file::{recover, LogWriter};
use crate::registry::{Registry, ServerEvent, VictimEntry, VictimStatus};
use crate::Result;

const FEED_CAPACITY: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct Submission {
    pub victim_id: String,
    /// `None` when the report id had already been ingested.
    pub event_id: Option<u64>,
}

impl Submission {
    pub fn duplicate(&self) -> bool {
        self.event_id.is_none()
    }
}

struct Inner {
    registry: Registry,
    events: Vec<ServerEvent>,
    log: Option<LogWriter>,
    feed: broadcast::Sender<ServerEvent>,
}

pub struct Store {
    inner: Mutex<Inner>,
}

impl Store {
    /// Volatile store, for tests and dry runs.
    pub fn in_memory() -> Self {
        Self::from_parts(Registry::default(), Vec::new(), None)
    }

    /// Recovers the registry from `path`, then appends to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let recovered = recover(path)?;
        log::info!(
            "recovered {} victims from {} events in {}",
            recovered.registry.len(),
            recovered.events.len(),
            path.display()
        );
        let writer = LogWriter::open(path, true)?;
        Ok(Self::from_parts(recovered.registry, recovered.events, Some(writer)))
    }

    fn from_parts(registry: Registry, events: Vec<ServerEvent>, log: Option<LogWriter>) -> Self {
        let (feed, _) = broadcast::channel(FEED_CAPACITY);
        Store {
            inner: Mutex::new(Inner {
                registry,
                events,
                log,
                feed,
            }),
        }
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    fn commit(inner: &mut Inner, event: ServerEvent) -> Result<ServerEvent> {
        if let Some(log) = inner.log.as_mut() {
            log.append(&event)?;
        }
        inner.registry.apply(&event);
        inner.events.push(event.clone());
        // No receivers is fine: nobody is listening yet.
        let _ = inner.feed.send(event.clone());
        Ok(event)
    }

    pub fn submit_report(&self, report: &VictimReport) -> Result<Submission> {
        let mut inner = self.lock();
        match inner.registry.prepare_report(report)? {
            None => Ok(Submission {
                victim_id: inner.registry.seen_report(&report.report_id).unwrap_or(&report.victim_id).to_owned(),
                event_id: None,
            }),
            Some(event) => {
                let event = Self::commit(&mut inner, event)?;
                Ok(Submission {
                    victim_id: event.payload.victim_id,
                    event_id: Some(event.id),
                })
            }
        }
    }

    pub fn update_status(&self, victim_id: &str, status: VictimStatus, responder: &str) -> Result<VictimEntry> {
        let mut inner = self.lock();
        let event = inner.registry.prepare_status(victim_id, status, responder, now_ms())?;
        Ok(Self::commit(&mut inner, event)?.payload)
    }

    pub fn list_victims(&self, status: Option<VictimStatus>, acuity: Option<Acuity>) -> Vec<VictimEntry> {
        self.lock().registry.list(status, acuity)
    }

    pub fn last_event_id(&self) -> u64 {
        self.lock().registry.last_event_id()
    }

    /// Events with id > `since`, plus a receiver for everything committed afterwards.
    pub fn subscribe(&self, since: u64) -> (Vec<ServerEvent>, broadcast::Receiver<ServerEvent>) {
        let inner = self.lock();
        let start = inner.events.partition_point(|e| e.id <= since);
        (inner.events[start..].to_vec(), inner.feed.subscribe())
    }

    /// Copy of the registry, for inspection.
    pub fn snapshot(&self) -> Registry {
        self.lock().registry.clone()
    }
}

fn now_ms() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as i64)
        .unwrap_or(0)
}
