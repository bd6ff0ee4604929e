//! Session transcripts: one JSON event per line, enough to rebuild the
//! session without re-running any tool.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Goal, ReplanEvent, Session, SessionState};
use crate::hub::TraceRecord;
use crate::plan::{advance, Plan, StepOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum TranscriptEvent {
    Start { session_id: String, goal: Goal },
    Plan { plan: Plan },
    Call { record: TraceRecord },
    MemoHit { step_number: u32, tool_name: String, uri: String },
    Step { outcome: StepOutcome },
    Replan { event: ReplanEvent },
    End {
        state: SessionState,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reason: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("transcript line {line}: {message}")]
pub struct TranscriptError {
    pub line: usize,
    pub message: String,
}

pub(crate) fn to_jsonl(events: &[TranscriptEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("transcript event serializes"));
        out.push('\n');
    }
    out
}

/// Rebuilds a session from transcript text. Blank lines are skipped; an
/// empty transcript yields an empty session in the planning state.
pub fn replay_transcript(text: &str) -> Result<Session, TranscriptError> {
    let mut session = Session::new("", Goal::new(""));
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| TranscriptError { line: i + 1, message };
        let event: TranscriptEvent = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        match &event {
            TranscriptEvent::Start { session_id, goal } => {
                session.session_id = session_id.clone();
                session.goal = goal.clone();
            }
            TranscriptEvent::Plan { plan } => {
                session.initial_plan = Some(plan.clone());
                session.plan = plan.clone();
                session.state = SessionState::Acting;
            }
            TranscriptEvent::Call { record } => {
                if record.is_top_level() {
                    session.history.push(record.call.call_id.clone());
                    session.counters.gateway_calls += 1;
                    if let Some(a) = &record.result.artifact {
                        session.final_artifact = Some(a.clone());
                    }
                }
            }
            TranscriptEvent::MemoHit { .. } => session.counters.memo_hits += 1,
            TranscriptEvent::Step { outcome } => {
                session.plan = advance(&session.plan, outcome).map_err(|e| err(e.to_string()))?;
            }
            TranscriptEvent::Replan { event } => {
                session.plan = event.new_plan.clone();
                session.replan_events.push(event.clone());
            }
            TranscriptEvent::End { state, reason } => {
                session.state = *state;
                session.abort_reason = reason.clone();
            }
        }
        session.transcript.push(event);
    }
    Ok(session)
}
