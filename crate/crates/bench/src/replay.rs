//! Rebuilds a session from its JSONL transcript and re-derives its metrics.

use std::path::Path;

use planact_core::metrics::MetricReport;
use planact_core::orchestrator::{replay_transcript, Session};
use thiserror::Error;

use crate::suite::score_session;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("corrupt trace at line {line}: {message}")]
    CorruptTrace { line: usize, message: String },
}

pub fn replay_text(text: &str) -> Result<Session, ReplayError> {
    replay_transcript(text).map_err(|e| ReplayError::CorruptTrace {
        line: e.line,
        message: e.message,
    })
}

pub fn replay(path: &Path) -> Result<Session, ReplayError> {
    let text = std::fs::read_to_string(path).map_err(|e| ReplayError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    replay_text(&text)
}

/// Replays `path` and scores it against `reference` the same way a live run is
/// scored.
pub fn replay_file(path: &Path, reference: &[String]) -> Result<(Session, MetricReport), ReplayError> {
    let session = replay(path)?;
    let metrics = score_session(&session, reference);
    Ok((session, metrics))
}
