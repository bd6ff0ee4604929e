//! The Plan-Act loop. A planner policy proposes a plan; the actor executes
//! the single ongoing step through the tool hub, records the outcome and
//! advances the plan; a failed step triggers a revision until the replan
//! budget runs out.

mod external;
mod planner;
mod transcript;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub use external::{ChatMessage, ChatRequest, ChatTransport, ExternalConfig, ExternalPlanner, HttpTransport, DEFAULT_SYSTEM_PROMPT};
pub use planner::{fresh, PlannerError, PlannerPolicy, ReviseRule, ScriptEntry, ScriptedPlanner};
pub use transcript::{replay_transcript, TranscriptError, TranscriptEvent};

use crate::hub::catalog::{SemanticType, STORYBOARD_TOOL};
use crate::hub::{emit_envelope, parse_envelope, Arguments, Artifact, ToolCall, ToolHub, TraceRecord};
use crate::memory::MemoryStores;
use crate::plan::{advance, output_reference, validate_plan, Plan, Step, StepOutcome, StepStatus};
use crate::storyboard::Storyboard;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub goal_text: String,
    #[serde(default)]
    pub provided_materials: Vec<String>,
    #[serde(default)]
    pub constraints: BTreeMap<String, Value>,
}

impl Goal {
    pub fn new(goal_text: impl Into<String>) -> Self {
        Self {
            goal_text: goal_text.into(),
            provided_materials: Vec::new(),
            constraints: BTreeMap::new(),
        }
    }

    pub fn material(mut self, uri: impl Into<String>) -> Self {
        self.provided_materials.push(uri.into());
        self
    }

    pub fn constraint(mut self, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.constraints.insert(key.into(), value.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionState {
    Planning,
    Acting,
    Replanning,
    Completed,
    Aborted,
}

impl SessionState {
    pub fn is_terminal(self) -> bool {
        matches!(self, SessionState::Completed | SessionState::Aborted)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplanEvent {
    pub failed_step: u32,
    pub old_plan: Plan,
    pub new_plan: Plan,
    pub error: String,
}

impl ReplanEvent {
    /// Zero-based index of the failed step, as used by ReplanQ.
    pub fn failure_index(&self) -> usize {
        self.failed_step.saturating_sub(1) as usize
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub gateway_calls: u32,
    pub memo_hits: u32,
    pub retrieved_traces: u32,
    pub retrieved_materials: u32,
    pub planner_retries: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub session_id: String,
    pub goal: Goal,
    /// The first accepted plan, before any execution.
    pub initial_plan: Option<Plan>,
    pub plan: Plan,
    /// Call ids of top-level gateway calls, in order.
    pub history: Vec<String>,
    pub state: SessionState,
    pub replan_events: Vec<ReplanEvent>,
    pub counters: Counters,
    pub final_artifact: Option<Artifact>,
    pub abort_reason: Option<String>,
    pub transcript: Vec<TranscriptEvent>,
}

impl Session {
    pub fn new(session_id: impl Into<String>, goal: Goal) -> Self {
        Self {
            session_id: session_id.into(),
            goal,
            initial_plan: None,
            plan: Plan::builder("").build(),
            history: Vec::new(),
            state: SessionState::Planning,
            replan_events: Vec::new(),
            counters: Counters::default(),
            final_artifact: None,
            abort_reason: None,
            transcript: Vec::new(),
        }
    }

    /// Gateway trace records in transcript order.
    pub fn trace_records(&self) -> Vec<&TraceRecord> {
        self.transcript
            .iter()
            .filter_map(|e| match e {
                TranscriptEvent::Call { record } => Some(record),
                _ => None,
            })
            .collect()
    }

    pub fn transcript_jsonl(&self) -> String {
        transcript::to_jsonl(&self.transcript)
    }

    fn log(&mut self, event: TranscriptEvent) {
        self.transcript.push(event);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryFlags {
    pub global: bool,
    pub user: bool,
    pub task: bool,
}

impl Default for MemoryFlags {
    fn default() -> Self {
        Self::ALL
    }
}

impl MemoryFlags {
    pub const ALL: MemoryFlags = MemoryFlags {
        global: true,
        user: true,
        task: true,
    };
    pub const NONE: MemoryFlags = MemoryFlags {
        global: false,
        user: false,
        task: false,
    };

    /// Comma-separated subset of `global,user,task`; `all` and `none` also work.
    pub fn parse(text: &str) -> Option<Self> {
        let mut flags = Self::NONE;
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "all" => flags = Self::ALL,
                "none" => {}
                "global" => flags.global = true,
                "user" => flags.user = true,
                "task" => flags.task = true,
                _ => return None,
            }
        }
        Some(flags)
    }

    pub fn label(&self) -> String {
        let parts: Vec<&str> = [("global", self.global), ("user", self.user), ("task", self.task)]
            .into_iter()
            .filter(|(_, on)| *on)
            .map(|(n, _)| n)
            .collect();
        if parts.is_empty() {
            "none".into()
        } else {
            parts.join(",")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub max_replans: u32,
    pub memory: MemoryFlags,
    pub retrieval_k: usize,
    /// Export each finished session to global memory.
    pub record_global: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            max_replans: 3,
            memory: MemoryFlags::ALL,
            retrieval_k: 3,
            record_global: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrchestratorError {
    #[error("plan invalid: {0}")]
    PlanInvalid(String),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error("replan budget of {0} exhausted")]
    ReplanBudgetExhausted(u32),
    #[error("session is {0:?}, not acting")]
    NotActing(SessionState),
}

pub struct Orchestrator {
    hub: Arc<ToolHub>,
    memory: Arc<MemoryStores>,
    planner: Arc<dyn PlannerPolicy>,
    config: RunConfig,
}

impl Orchestrator {
    pub fn new(hub: Arc<ToolHub>, memory: Arc<MemoryStores>, planner: Arc<dyn PlannerPolicy>, config: RunConfig) -> Self {
        Self {
            hub,
            memory,
            planner,
            config,
        }
    }

    pub fn hub(&self) -> &ToolHub {
        &self.hub
    }

    pub fn memory(&self) -> &MemoryStores {
        &self.memory
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    /// Plans and executes `goal` to completion or abort. Task memory of
    /// `session_id` carries over between calls until [`Self::end_session`].
    pub fn run_task(&self, goal: Goal, session_id: &str) -> Result<Session, OrchestratorError> {
        self.hub.open_session(session_id);
        let mut session = Session::new(session_id, goal);
        session.log(TranscriptEvent::Start {
            session_id: session_id.to_string(),
            goal: session.goal.clone(),
        });

        let flags = self.config.memory;
        let context = self
            .memory
            .context(&session.goal.goal_text, self.config.retrieval_k, flags.global, flags.user);
        session.counters.retrieved_traces = context.traces.len() as u32;
        session.counters.retrieved_materials = context.materials.len() as u32;

        let retries_before = self.planner.retries();
        let plan = self.propose(&session.goal, &context)?;
        session.counters.planner_retries = self.planner.retries() - retries_before;
        session.initial_plan = Some(plan.clone());
        session.plan = plan.clone();
        session.log(TranscriptEvent::Plan { plan });
        session.state = SessionState::Acting;

        while !session.state.is_terminal() {
            if session.plan.is_complete() {
                session.state = SessionState::Completed;
                break;
            }
            if let Some(failed) = session.plan.failed_step().map(|s| s.step_number) {
                if let Err(e) = self.replan(&mut session, failed) {
                    session.state = SessionState::Aborted;
                    session.abort_reason = Some(e.to_string());
                }
                continue;
            }
            if session.plan.ongoing_step().is_none() {
                session.state = SessionState::Aborted;
                session.abort_reason = Some("no runnable step".into());
                continue;
            }
            self.step_once(&mut session)?;
        }

        session.log(TranscriptEvent::End {
            state: session.state,
            reason: session.abort_reason.clone(),
        });
        if self.config.record_global && flags.global {
            // Non-terminal sessions cannot reach this point.
            let _ = self.memory.record_trace(&session, None);
        }
        Ok(session)
    }

    /// Closes the hub session and drops its task memory.
    pub fn end_session(&self, session_id: &str) {
        self.hub.close_session(session_id);
        self.memory.end_session(session_id);
    }

    fn propose(&self, goal: &Goal, context: &crate::memory::MemoryContext) -> Result<Plan, OrchestratorError> {
        let mut last = String::new();
        for _ in 0..2 {
            match self.planner.propose_plan(goal, context) {
                Ok(plan) => match accept(&plan) {
                    Ok(()) => return Ok(plan),
                    Err(why) => last = why,
                },
                Err(PlannerError::PlanInvalid(why)) => last = why,
                Err(e) => return Err(e.into()),
            }
        }
        Err(OrchestratorError::PlanInvalid(last))
    }

    /// Executes the ongoing step: resolves its inputs, consults the memo
    /// table, calls the tool if needed and advances the plan by one step.
    pub fn step_once(&self, session: &mut Session) -> Result<(), OrchestratorError> {
        if session.state != SessionState::Acting {
            return Err(OrchestratorError::NotActing(session.state));
        }
        let step = session
            .plan
            .ongoing_step()
            .cloned()
            .ok_or_else(|| OrchestratorError::PlanInvalid("no ongoing step".into()))?;
        let outcome = match self.resolve_inputs(session, &step) {
            Err(message) => StepOutcome::failure(step.step_number, format!("unresolvable input: {message}")),
            Ok(inputs) => self.act(session, &step, inputs),
        };
        let plan = advance(&session.plan, &outcome).map_err(|e| OrchestratorError::PlanInvalid(e.to_string()))?;
        session.plan = plan;
        session.log(TranscriptEvent::Step { outcome });
        Ok(())
    }

    fn resolve_inputs(&self, session: &Session, step: &Step) -> Result<Vec<String>, String> {
        let mut out = Vec::new();
        for requirement in &step.tool.input_requirements {
            if let Some(n) = output_reference(requirement) {
                let from_task = self
                    .config
                    .memory
                    .task
                    .then(|| self.memory.task(&session.session_id))
                    .flatten()
                    .and_then(|t| t.step_output(n).map(|a| a.uri.clone()));
                let from_plan = || {
                    session
                        .plan
                        .step(n)
                        .filter(|s| s.status == StepStatus::Success)
                        .map(|s| s.output.clone())
                };
                match from_task.or_else(from_plan) {
                    Some(uri) if n < step.step_number => out.push(uri),
                    _ => return Err(format!("output of step {n} is not available")),
                }
            } else if session.goal.provided_materials.iter().any(|m| m == requirement)
                || (self.config.memory.user && self.memory.material_by_uri(requirement).is_some())
            {
                out.push(requirement.clone());
            } else {
                return Err(format!("{requirement:?} is neither a step reference nor a known material"));
            }
        }
        Ok(out)
    }

    fn build_arguments(&self, session: &Session, step: &Step, inputs: Vec<String>) -> Option<(String, Arguments)> {
        let d = self.hub.find_tool(&step.tool.name)?;
        let mut inputs = inputs.into_iter();
        let mut args = Arguments::new();
        for p in &d.param_schema {
            let value = match p.semantic_type {
                SemanticType::MediaList => {
                    let rest: Vec<Value> = inputs.by_ref().map(Value::String).collect();
                    (!rest.is_empty()).then_some(Value::Array(rest))
                }
                t if t.is_media() => inputs.next().map(Value::String),
                _ if p.name == "prompt" => Some(Value::String(step.action_description.clone())),
                _ if p.name == "resolution" => self
                    .config
                    .memory
                    .user
                    .then(|| self.memory.preference("preferred_resolution"))
                    .flatten()
                    .map(Value::String)
                    .or_else(|| session.goal.constraints.get("resolution").cloned()),
                _ => session.goal.constraints.get(&p.name).cloned(),
            };
            if let Some(v) = value {
                args.insert(p.name.clone(), v);
            }
        }
        Some((d.server_name, args))
    }

    fn act(&self, session: &mut Session, step: &Step, inputs: Vec<String>) -> StepOutcome {
        let n = step.step_number;
        let use_task = self.config.memory.task;
        let (server_name, args) = self
            .build_arguments(session, step, inputs)
            .unwrap_or_else(|| ("unknown_server".to_string(), Arguments::new()));

        if use_task {
            if let Some(hit) = self.memory.memo_lookup(&session.session_id, &step.tool.name, &args) {
                session.counters.memo_hits += 1;
                session.log(TranscriptEvent::MemoHit {
                    step_number: n,
                    tool_name: step.tool.name.clone(),
                    uri: hit.uri.clone(),
                });
                self.memory
                    .with_task(&session.session_id, |t| t.put_step_output(n, hit.clone()));
                let uri = hit.uri.clone();
                session.final_artifact = Some(hit);
                return StepOutcome::success(n, uri);
            }
        }

        // The actor speaks through the call envelope.
        let message = emit_envelope(&ToolCall::new(server_name, step.tool.name.clone(), args.clone()));
        let call = match parse_envelope(&message) {
            Ok(call) => call.in_session(session.session_id.clone(), n),
            Err(e) => return StepOutcome::failure(n, format!("envelope: {e}")),
        };
        let result = self.hub.invoke(call);
        session.counters.gateway_calls += 1;
        let call_id = match &result {
            Ok(r) => r.call_id.clone(),
            Err(e) => e.call_id.clone(),
        };
        session.history.push(call_id.clone());
        let family = self.hub.trace().call_family(&call_id);
        if use_task {
            for record in family.iter().filter(|r| r.call.tool_name == STORYBOARD_TOOL) {
                if let Some(sb) = storyboard_of(record) {
                    self.memory.with_task(&session.session_id, |t| t.write_storyboard(sb));
                }
            }
        }
        for record in family {
            session.log(TranscriptEvent::Call { record });
        }

        match result {
            Ok(r) => {
                let artifact = r.artifact.expect("successful call carries an artifact");
                if use_task {
                    self.memory.with_task(&session.session_id, |t| {
                        t.memo_store(&step.tool.name, &args, artifact.clone());
                        t.put_step_output(n, artifact.clone());
                    });
                }
                let uri = artifact.uri.clone();
                session.final_artifact = Some(artifact);
                StepOutcome::success(n, uri)
            }
            Err(e) => StepOutcome::failure(n, e.to_string()),
        }
    }

    /// Asks the policy to revise the plan around `failed_step`, checks the
    /// revision and records the event.
    pub fn replan(&self, session: &mut Session, failed_step: u32) -> Result<(), OrchestratorError> {
        if session.replan_events.len() as u32 >= self.config.max_replans {
            return Err(OrchestratorError::ReplanBudgetExhausted(self.config.max_replans));
        }
        session.state = SessionState::Replanning;
        let error = session
            .plan
            .step(failed_step)
            .map(|s| s.output.clone())
            .unwrap_or_default();
        let retries_before = self.planner.retries();
        let revised = self.planner.revise_plan(&session.plan, failed_step, &error);
        session.counters.planner_retries += self.planner.retries() - retries_before;
        let new_plan = revised.map_err(|e| match e {
            PlannerError::PlanInvalid(why) => OrchestratorError::PlanInvalid(why),
            other => other.into(),
        })?;
        accept(&new_plan).map_err(OrchestratorError::PlanInvalid)?;
        check_prefix(&session.plan, &new_plan, failed_step).map_err(OrchestratorError::PlanInvalid)?;
        let event = ReplanEvent {
            failed_step,
            old_plan: session.plan.clone(),
            new_plan: new_plan.clone(),
            error,
        };
        session.log(TranscriptEvent::Replan { event: event.clone() });
        session.replan_events.push(event);
        session.plan = new_plan;
        session.state = SessionState::Acting;
        Ok(())
    }
}

/// A plan the actor can run: valid, and either complete or with one
/// ongoing step and no failures.
fn accept(plan: &Plan) -> Result<(), String> {
    let report = validate_plan(plan);
    if !report.valid {
        return Err(report.to_string());
    }
    if plan.failed_step().is_some() {
        return Err("plan still contains a failed step".into());
    }
    if !plan.is_complete() && plan.ongoing_count() != 1 {
        return Err("plan has no ongoing step".into());
    }
    Ok(())
}

fn check_prefix(old: &Plan, new: &Plan, failed_step: u32) -> Result<(), String> {
    let keep = failed_step.saturating_sub(1) as usize;
    if new.steps.len() < keep || old.steps[..keep] != new.steps[..keep] {
        return Err(format!("revision changed steps before step {failed_step}"));
    }
    Ok(())
}

fn storyboard_of(record: &TraceRecord) -> Option<Storyboard> {
    let value = record.result.artifact.as_ref()?.metadata.get("storyboard")?;
    serde_json::from_value(value.clone()).ok()
}
