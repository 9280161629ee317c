//! Append-only JSON-lines event log and crash recovery.

use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::registry::{Registry, ServerEvent};
use crate::{Result, ServerError};

/// State rebuilt from a log, plus the events in commit order.
#[derive(Debug, Clone, Default)]
pub struct Recovered {
    pub registry: Registry,
    pub events: Vec<ServerEvent>,
    /// Bytes of a torn final line that were discarded.
    pub discarded_bytes: usize,
}

/// Replays the log at `path`. A missing file is an empty log. An unparsable
/// final line (a write cut short by a crash) is dropped and truncated away so
/// later appends start on a clean line; an unparsable earlier line is fatal.
pub fn recover(path: impl AsRef<Path>) -> Result<Recovered> {
    let path = path.as_ref();
    let storage = |source| ServerError::Storage {
        path: path.to_owned(),
        source,
    };
    let mut bytes = Vec::new();
    match File::open(path) {
        Ok(mut f) => {
            f.read_to_end(&mut bytes).map_err(storage)?;
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Recovered::default()),
        Err(e) => return Err(storage(e)),
    }

    let mut out = Recovered::default();
    let mut offset = 0;
    let mut line_no = 0;
    while offset < bytes.len() {
        line_no += 1;
        let end = bytes[offset..].iter().position(|&b| b == b'\n').map(|i| offset + i);
        let line_end = end.unwrap_or(bytes.len());
        let next = end.map_or(bytes.len(), |e| e + 1);
        let line = &bytes[offset..line_end];
        let is_last = next >= bytes.len();

        if line.iter().all(u8::is_ascii_whitespace) {
            offset = next;
            continue;
        }
        match serde_json::from_slice::<ServerEvent>(line) {
            Ok(event) if event.id > out.registry.last_event_id() => {
                out.registry.apply(&event);
                out.events.push(event);
            }
            Ok(event) => {
                return Err(ServerError::Corrupt {
                    path: path.to_owned(),
                    line: line_no,
                    message: format!("event id {} does not follow {}", event.id, out.registry.last_event_id()),
                })
            }
            Err(e) if is_last => {
                log::warn!("{}: discarding torn final line {line_no} ({e})", path.display());
                out.discarded_bytes = bytes.len() - offset;
                let file = OpenOptions::new().write(true).open(path).map_err(storage)?;
                file.set_len(offset as u64).map_err(storage)?;
                file.sync_all().map_err(storage)?;
                break;
            }
            Err(e) => {
                return Err(ServerError::Corrupt {
                    path: path.to_owned(),
                    line: line_no,
                    message: e.to_string(),
                })
            }
        }
        offset = next;
    }
    Ok(out)
}

/// Appends one event per line and syncs it to disk before returning.
#[derive(Debug)]
pub struct LogWriter {
    path: PathBuf,
    file: File,
    sync: bool,
}

impl LogWriter {
    pub fn open(path: impl AsRef<Path>, sync: bool) -> Result<Self> {
        let path = path.as_ref().to_owned();
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .read(true)
            .open(&path)
            .map_err(|source| ServerError::Storage {
                path: path.clone(),
                source,
            })?;
        // A file that lost its trailing newline would glue the next event onto the last one.
        let len = file.metadata().map(|m| m.len()).unwrap_or(0);
        if len > 0 {
            use std::io::{Seek, SeekFrom};
            let mut last = [0u8; 1];
            file.seek(SeekFrom::Start(len - 1))
                .and_then(|_| file.read_exact(&mut last))
                .map_err(|source| ServerError::Storage {
                    path: path.clone(),
                    source,
                })?;
            if last[0] != b'\n' {
                file.write_all(b"\n").map_err(|source| ServerError::Storage {
                    path: path.clone(),
                    source,
                })?;
            }
        }
        Ok(LogWriter { path, file, sync })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, event: &ServerEvent) -> Result<()> {
        let mut line = serde_json::to_vec(event).expect("events serialize");
        line.push(b'\n');
        let storage = |source| ServerError::Storage {
            path: self.path.clone(),
            source,
        };
        self.file.write_all(&line).map_err(storage)?;
        if self.sync {
            self.file.sync_data().map_err(storage)?;
        }
        Ok(())
    }
}
