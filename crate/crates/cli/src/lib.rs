//! The `artemis` command-line tool.
//!
//! Each pipeline stage is a plain function in [`stages`] that reads and
//! writes files; [`manifest`] chains them from a JSON run manifest and
//! records a sha256 digest for every artifact; [`cli`] maps subcommands and
//! errors onto those functions and onto exit statuses.

pub mod cli;
pub mod error;
pub mod manifest;
pub mod stages;

pub use cli::main_with_args;
pub use error::{exit, CliError, Result};
pub use manifest::{run_pipeline, Artifact, ArtifactStatus, RunManifest, RunOutcome, RunRecord, RunStatus, Stage};
pub use stages::ModelKind;
