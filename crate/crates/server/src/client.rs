//! Minimal consumer of the event feed.

use std::pin::Pin;

use futures::{Stream, StreamExt};
use thiserror::Error;

use crate::registry::ServerEvent;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error(transparent)]
    Http(#[from] reqwest::Error),
    #[error("event feed answered HTTP {0}")]
    Status(u16),
    #[error("undecodable event: {0}")]
    Decode(String),
}

type ByteStream = Pin<Box<dyn Stream<Item = reqwest::Result<axum::body::Bytes>> + Send>>;

/// A subscription to `GET /api/events`, yielding decoded events in order.
pub struct EventFeed {
    body: ByteStream,
    buffer: Vec<u8>,
    last_id: Option<u64>,
}

impl EventFeed {
    pub async fn connect(base_url: &str, since: Option<u64>) -> Result<Self, ClientError> {
        let mut url = format!("{}/api/events", base_url.trim_end_matches('/'));
        if let Some(since) = since {
            url.push_str(&format!("?since={since}"));
        }
        let response = reqwest::Client::new()
            .get(url)
            .header("accept", "text/event-stream")
            .send()
            .await?;
        if !response.status().is_success() {
            return Err(ClientError::Status(response.status().as_u16()));
        }
        Ok(EventFeed {
            body: Box::pin(response.bytes_stream()),
            buffer: Vec::new(),
            last_id: since,
        })
    }

    /// Id of the last event returned; resume from here after a disconnect.
    pub fn last_id(&self) -> Option<u64> {
        self.last_id
    }

    /// The next event, or `None` once the server closes the stream.
    pub async fn next_event(&mut self) -> Option<Result<ServerEvent, ClientError>> {
        loop {
            if let Some(end) = self.buffer.windows(2).position(|w| w == b"\n\n") {
                let frame: Vec<u8> = self.buffer.drain(..end + 2).collect();
                let frame = String::from_utf8_lossy(&frame);
                let data: Vec<&str> = frame
                    .lines()
                    .filter_map(|l| l.strip_prefix("data:"))
                    .map(|d| d.strip_prefix(' ').unwrap_or(d))
                    .collect();
                if data.is_empty() {
                    continue; // keep-alive comment
                }
                let parsed = serde_json::from_str::<ServerEvent>(&data.join("\n"))
                    .map_err(|e| ClientError::Decode(e.to_string()));
                if let Ok(event) = &parsed {
                    self.last_id = Some(event.id);
                }
                return Some(parsed);
            }
            match self.body.next().await? {
                Ok(chunk) => self.buffer.extend(chunk.iter().filter(|&&b| b != b'\r')),
                Err(e) => return Some(Err(e.into())),
            }
        }
    }
}
