//! Tool gateway: catalog, envelope parsing, argument validation, dispatch to
//! server backends, failure injection and the append-only trace.
//!
//! Calls within one session are serialized by a per-session lock; distinct
//! sessions may invoke concurrently. The registry allows concurrent reads and
//! serialized writes.

mod call;
pub mod catalog;
pub mod envelope;
pub mod failure;
pub mod mock;
pub mod trace;
pub mod transport;
mod workflow;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use thiserror::Error;

pub use call::{Arguments, Artifact, CallStatus, Provenance, ToolCall, ToolResult, TraceRecord};
pub use catalog::{
    ArtifactKind, Category, CatalogError, ParamSpec, Registry, SemanticType, ToolDescriptor, ToolKind,
};
pub use envelope::{emit_envelope, parse_envelope, EnvelopeError};
pub use failure::{FailureMode, FailurePlan};
pub use trace::{TraceError, TraceLog};
pub use transport::{MockBackend, ServerBackend, SubprocessBackend};

use crate::canonical::call_digest;

/// How trace timestamps are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Clock {
    /// Milliseconds of simulated latency accumulated by the session. Runs are
    /// reproducible byte for byte.
    #[default]
    Logical,
    /// Wall-clock milliseconds since the Unix epoch.
    System,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvokeErrorKind {
    #[error("session {0} is not open")]
    UnknownSession(String),
    #[error("unknown tool {server_name}/{tool_name}")]
    UnknownTool { server_name: String, tool_name: String },
    #[error("schema violation on parameter {param}: {reason}")]
    SchemaViolation { param: String, reason: String },
    #[error("server {0} unavailable")]
    ServerUnavailable(String),
    #[error("tool {tool_name} failed: {message}")]
    ToolFailed { tool_name: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}")]
pub struct InvokeError {
    pub call_id: String,
    pub kind: InvokeErrorKind,
}

#[derive(Debug, Default)]
struct HubSession {
    next_index: u64,
    elapsed_ms: u64,
}

pub struct ToolHub {
    registry: RwLock<Registry>,
    backends: RwLock<BTreeMap<String, Arc<dyn ServerBackend>>>,
    default_backend: Option<Arc<dyn ServerBackend>>,
    sessions: Mutex<HashMap<String, Arc<Mutex<HubSession>>>>,
    failure: RwLock<Option<FailurePlan>>,
    session_failures: RwLock<HashMap<String, FailurePlan>>,
    trace: TraceLog,
    clock: Clock,
}

impl Default for ToolHub {
    fn default() -> Self {
        Self::new(Registry::new())
    }
}

impl ToolHub {
    /// A hub over `registry` whose servers all run the in-process mocks.
    pub fn new(registry: Registry) -> Self {
        Self {
            registry: RwLock::new(registry),
            backends: RwLock::new(BTreeMap::new()),
            default_backend: Some(Arc::new(MockBackend)),
            sessions: Mutex::new(HashMap::new()),
            failure: RwLock::new(None),
            session_failures: RwLock::new(HashMap::new()),
            trace: TraceLog::new(),
            clock: Clock::Logical,
        }
    }

    pub fn seeded() -> Self {
        Self::new(Registry::seeded())
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    /// Servers without an explicit backend become unavailable.
    pub fn without_default_backend(mut self) -> Self {
        self.default_backend = None;
        self
    }

    pub fn set_backend(&self, server_name: &str, backend: Arc<dyn ServerBackend>) {
        self.backends
            .write()
            .unwrap()
            .insert(server_name.to_string(), backend);
    }

    // ── catalog ──────────────────────────────────────────────

    pub fn register_tool(&self, d: ToolDescriptor) -> Result<(), CatalogError> {
        self.registry.write().unwrap().register(d)
    }

    pub fn list_catalog(&self, filter: Option<Category>) -> Vec<ToolDescriptor> {
        self.registry.read().unwrap().list(filter)
    }

    pub fn catalog_size(&self) -> usize {
        self.registry.read().unwrap().len()
    }

    pub fn find_tool(&self, name: &str) -> Option<ToolDescriptor> {
        self.registry.read().unwrap().find(name).cloned()
    }

    pub fn export_catalog(&self) -> String {
        self.registry.read().unwrap().export_json()
    }

    // ── sessions and failures ────────────────────────────────

    pub fn open_session(&self, session_id: &str) {
        self.sessions
            .lock()
            .unwrap()
            .entry(session_id.to_string())
            .or_default();
    }

    pub fn close_session(&self, session_id: &str) {
        self.sessions.lock().unwrap().remove(session_id);
        self.session_failures.write().unwrap().remove(session_id);
    }

    pub fn has_session(&self, session_id: &str) -> bool {
        self.sessions.lock().unwrap().contains_key(session_id)
    }

    /// Failure plan for every session without its own plan; `None` disables.
    pub fn configure_failure(&self, plan: Option<FailurePlan>) {
        *self.failure.write().unwrap() = plan;
    }

    pub fn configure_session_failure(&self, session_id: &str, plan: FailurePlan) {
        self.session_failures
            .write()
            .unwrap()
            .insert(session_id.to_string(), plan);
    }

    fn injected(&self, session_id: &str, index: u64, tool_name: &str) -> bool {
        if let Some(plan) = self.session_failures.read().unwrap().get(session_id) {
            return plan.should_fail(session_id, index, tool_name);
        }
        self.failure
            .read()
            .unwrap()
            .as_ref()
            .is_some_and(|p| p.should_fail(session_id, index, tool_name))
    }

    pub fn trace(&self) -> &TraceLog {
        &self.trace
    }

    // ── invocation ───────────────────────────────────────────

    /// Validates, dispatches and traces one call. Exactly one top-level trace
    /// record is appended per call on an open session, whatever the outcome;
    /// workflow calls additionally append one record per constituent atom call
    /// before their own.
    pub fn invoke(&self, call: ToolCall) -> Result<ToolResult, InvokeError> {
        let session = self
            .sessions
            .lock()
            .unwrap()
            .get(&call.session_id)
            .cloned()
            .ok_or_else(|| InvokeError {
                call_id: String::new(),
                kind: InvokeErrorKind::UnknownSession(call.session_id.clone()),
            })?;
        let mut session = session.lock().unwrap();
        let index = session.next_index;
        session.next_index += 1;
        let mut call = call;
        call.call_id = format!("{}#{index}", call.session_id);

        let outcome = self.execute(&call, index, &mut session);
        let (result, error) = match outcome {
            Ok((artifact, latency)) => (ToolResult::ok(&call.call_id, artifact, latency), None),
            Err((kind, latency)) => (
                ToolResult::failed(&call.call_id, kind.to_string(), latency),
                Some(kind),
            ),
        };
        session.elapsed_ms += result.latency_ms;
        let record = TraceRecord {
            timestamp_ms: self.stamp(session.elapsed_ms),
            session_id: call.session_id.clone(),
            parent_call_id: None,
            call: call.clone(),
            result: result.clone(),
        };
        // The in-memory log is authoritative; a failing file sink is not a
        // failure of the call.
        let _ = self.trace.append(record);
        match error {
            None => Ok(result),
            Some(kind) => Err(InvokeError {
                call_id: call.call_id,
                kind,
            }),
        }
    }

    fn stamp(&self, elapsed_ms: u64) -> u64 {
        match self.clock {
            Clock::Logical => elapsed_ms,
            Clock::System => SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
        }
    }

    fn backend_for(&self, server_name: &str) -> Option<Arc<dyn ServerBackend>> {
        self.backends
            .read()
            .unwrap()
            .get(server_name)
            .cloned()
            .or_else(|| self.default_backend.clone())
    }

    fn execute(
        &self,
        call: &ToolCall,
        index: u64,
        session: &mut HubSession,
    ) -> Result<(Artifact, u64), (InvokeErrorKind, u64)> {
        let descriptor = self
            .registry
            .read()
            .unwrap()
            .get(&call.server_name, &call.tool_name)
            .cloned()
            .ok_or_else(|| {
                (
                    InvokeErrorKind::UnknownTool {
                        server_name: call.server_name.clone(),
                        tool_name: call.tool_name.clone(),
                    },
                    0,
                )
            })?;
        validate_arguments(&descriptor, &call.arguments).map_err(|k| (k, 0))?;
        if self.injected(&call.session_id, index, &call.tool_name) {
            return Err((InvokeErrorKind::ServerUnavailable(descriptor.server_name.clone()), 0));
        }
        match descriptor.kind {
            ToolKind::Atom => self.run_atom(&descriptor, call),
            ToolKind::Workflow => self.run_workflow(&descriptor, call, session),
        }
    }

    fn run_atom(&self, d: &ToolDescriptor, call: &ToolCall) -> Result<(Artifact, u64), (InvokeErrorKind, u64)> {
        let backend = self
            .backend_for(&d.server_name)
            .ok_or_else(|| (InvokeErrorKind::ServerUnavailable(d.server_name.clone()), 0))?;
        let exec = backend
            .execute(&d.server_name, call, d.produces)
            .map_err(|_| (InvokeErrorKind::ServerUnavailable(d.server_name.clone()), 0))?;
        let latency = exec.latency_ms;
        exec.outcome.map(|a| (a, latency)).map_err(|message| {
            (
                InvokeErrorKind::ToolFailed {
                    tool_name: call.tool_name.clone(),
                    message,
                },
                latency,
            )
        })
    }

    fn run_workflow(
        &self,
        d: &ToolDescriptor,
        call: &ToolCall,
        session: &mut HubSession,
    ) -> Result<(Artifact, u64), (InvokeErrorKind, u64)> {
        let mut children = ChildDispatch {
            hub: self,
            parent: call,
            allowed: &d.expansion,
            next_child: 0,
            latency_ms: 0,
            elapsed_ms: session.elapsed_ms,
        };
        let output = workflow::run(&d.name, &call.arguments, &mut children);
        let latency = children.latency_ms;
        let mut metadata = output.map_err(|message| {
            (
                InvokeErrorKind::ToolFailed {
                    tool_name: call.tool_name.clone(),
                    message,
                },
                latency,
            )
        })?;
        let digest = call_digest(&call.tool_name, &call.arguments);
        metadata.insert("content_digest".into(), json!(&digest[..16]));
        metadata.insert("constituent_calls".into(), json!(children.next_child));
        let artifact = Artifact {
            uri: mock::artifact_uri(&d.server_name, &d.name, d.produces, &digest),
            kind: d.produces,
            metadata,
            provenance: mock::provenance(call),
        };
        Ok((artifact, latency))
    }

    /// Re-executes the top-level calls of `records` on this hub, in order,
    /// and returns the results. With the same catalog and failure plan the
    /// results equal the recorded ones.
    pub fn replay(&self, records: &[TraceRecord]) -> Vec<ToolResult> {
        let mut out = Vec::new();
        for r in records.iter().filter(|r| r.is_top_level()) {
            self.open_session(&r.session_id);
            let mut call = r.call.clone();
            call.call_id.clear();
            let result = match self.invoke(call) {
                Ok(result) => result,
                Err(e) => self
                    .trace
                    .snapshot()
                    .into_iter()
                    .rev()
                    .find(|t| t.call.call_id == e.call_id && t.is_top_level())
                    .map(|t| t.result)
                    .unwrap_or_else(|| ToolResult::failed(&e.call_id, e.kind.to_string(), 0)),
            };
            out.push(result);
        }
        out
    }
}

struct ChildDispatch<'a> {
    hub: &'a ToolHub,
    parent: &'a ToolCall,
    allowed: &'a [String],
    next_child: u64,
    latency_ms: u64,
    elapsed_ms: u64,
}

impl workflow::AtomDispatch for ChildDispatch<'_> {
    fn atom(&mut self, tool_name: &str, args: Arguments) -> Result<Artifact, String> {
        if !self.allowed.iter().any(|t| t == tool_name) {
            return Err(format!("{tool_name} is not in the declared expansion"));
        }
        let descriptor = self
            .hub
            .find_tool(tool_name)
            .ok_or_else(|| format!("atom {tool_name} is not registered"))?;
        let call = ToolCall {
            server_name: descriptor.server_name.clone(),
            tool_name: tool_name.to_string(),
            arguments: args,
            session_id: self.parent.session_id.clone(),
            step_number: self.parent.step_number,
            call_id: format!("{}.{}", self.parent.call_id, self.next_child),
        };
        self.next_child += 1;
        let outcome = match validate_arguments(&descriptor, &call.arguments) {
            Ok(()) => self.hub.run_atom(&descriptor, &call),
            Err(kind) => Err((kind, 0)),
        };
        let (result, error) = match outcome {
            Ok((artifact, latency)) => (ToolResult::ok(&call.call_id, artifact.clone(), latency), Ok(artifact)),
            Err((kind, latency)) => (
                ToolResult::failed(&call.call_id, kind.to_string(), latency),
                Err(format!("{}: {kind}", call.call_id)),
            ),
        };
        self.latency_ms += result.latency_ms;
        self.elapsed_ms += result.latency_ms;
        let record = TraceRecord {
            timestamp_ms: self.hub.stamp(self.elapsed_ms),
            session_id: call.session_id.clone(),
            parent_call_id: Some(self.parent.call_id.clone()),
            call,
            result,
        };
        let _ = self.hub.trace.append(record);
        error
    }
}

/// Checks `args` against the descriptor's parameter schema.
pub fn validate_arguments(d: &ToolDescriptor, args: &Arguments) -> Result<(), InvokeErrorKind> {
    let violation = |param: &str, reason: String| InvokeErrorKind::SchemaViolation {
        param: param.to_string(),
        reason,
    };
    for key in args.keys() {
        if d.param(key).is_none() {
            return Err(violation(key, "unknown parameter".into()));
        }
    }
    for spec in &d.param_schema {
        let Some(value) = args.get(&spec.name) else {
            if spec.required {
                return Err(violation(&spec.name, "missing required parameter".into()));
            }
            continue;
        };
        let ok = match spec.semantic_type {
            SemanticType::Text => value.is_string(),
            SemanticType::Integer => value.is_i64() || value.is_u64(),
            SemanticType::Number => value.is_number(),
            SemanticType::Boolean => value.is_boolean(),
            SemanticType::Image | SemanticType::Video | SemanticType::Audio | SemanticType::Media => {
                value.as_str().is_some_and(|s| !s.is_empty())
            }
            SemanticType::MediaList => value.as_array().is_some_and(|items| {
                !items.is_empty() && items.iter().all(|v| v.as_str().is_some_and(|s| !s.is_empty()))
            }),
        };
        if !ok {
            return Err(violation(
                &spec.name,
                format!("expected {:?}, found {}", spec.semantic_type, crate::strict::kind(value)),
            ));
        }
    }
    Ok(())
}

/// Builds arguments from a JSON object literal.
pub fn arguments(value: Value) -> Arguments {
    match value {
        Value::Object(map) => map,
        other => panic!("arguments must be an object, got {other}"),
    }
}
