use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::catalog::ArtifactKind;

pub type Arguments = Map<String, Value>;

/// One tool invocation. `session_id`, `step_number` and `call_id` are bound
/// by the caller and the hub; an envelope only carries server, tool and
/// arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    pub server_name: String,
    pub tool_name: String,
    pub arguments: Arguments,
    pub session_id: String,
    pub step_number: u32,
    pub call_id: String,
}

impl ToolCall {
    pub fn new(server_name: impl Into<String>, tool_name: impl Into<String>, arguments: Arguments) -> Self {
        Self {
            server_name: server_name.into(),
            tool_name: tool_name.into(),
            arguments,
            session_id: String::new(),
            step_number: 0,
            call_id: String::new(),
        }
    }

    pub fn in_session(mut self, session_id: impl Into<String>, step_number: u32) -> Self {
        self.session_id = session_id.into();
        self.step_number = step_number;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub session_id: String,
    pub step_number: u32,
    pub tool_name: String,
    pub call_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub uri: String,
    pub kind: ArtifactKind,
    pub metadata: Map<String, Value>,
    pub provenance: Provenance,
}

impl Artifact {
    /// Equality of what was produced, ignoring which call produced it.
    pub fn same_content(&self, other: &Artifact) -> bool {
        self.uri == other.uri && self.kind == other.kind && self.metadata == other.metadata
    }

    pub fn duration_s(&self) -> Option<u64> {
        self.metadata.get("duration_s").and_then(Value::as_u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CallStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolResult {
    pub call_id: String,
    pub status: CallStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact: Option<Artifact>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_message: Option<String>,
    pub latency_ms: u64,
}

impl ToolResult {
    pub fn ok(call_id: &str, artifact: Artifact, latency_ms: u64) -> Self {
        Self {
            call_id: call_id.to_string(),
            status: CallStatus::Ok,
            artifact: Some(artifact),
            error_message: None,
            latency_ms,
        }
    }

    pub fn failed(call_id: &str, message: impl Into<String>, latency_ms: u64) -> Self {
        Self {
            call_id: call_id.to_string(),
            status: CallStatus::Failed,
            artifact: None,
            error_message: Some(message.into()),
            latency_ms,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == CallStatus::Ok
    }
}

/// One line of the append-only trace. Calls made inside a workflow carry the
/// workflow's call id in `parent_call_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub timestamp_ms: u64,
    pub session_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_call_id: Option<String>,
    pub call: ToolCall,
    pub result: ToolResult,
}

impl TraceRecord {
    pub fn is_top_level(&self) -> bool {
        self.parent_call_id.is_none()
    }
}
