//! Command server: ingests victim reports, keeps the victim registry in an
//! append-only JSON-lines log, and pushes every committed change to
//! server-sent-event subscribers.

pub mod client;
mod error;
pub mod http;
pub mod log_file;
pub mod registry;
pub mod store;

pub use error::{Result, ServerError};
pub use http::{router, run, serve, ServerConfig};
pub use registry::{EventKind, Registry, ServerEvent, StatusChange, VictimEntry, VictimStatus};
pub use store::{Store, Submission};
