//! Planner backed by a chat-completion endpoint.
//!
//! Request: `POST {endpoint}` with `{"model", "system", "messages": [{"role", "content"}]}`.
//! Response: `{"content": "<reply text>"}`.

use std::sync::atomic::{AtomicU32, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::planner::{PlannerError, PlannerPolicy};
use super::Goal;
use crate::memory::MemoryContext;
use crate::plan::{parse_plan, serialize_plan, validate_plan, Plan};

pub const DEFAULT_SYSTEM_PROMPT: &str = "You plan video-production tasks for an agent that can call one tool at a time.

Reply with a single JSON object and nothing else:
{\"task_analysis\": string,
 \"execution_plan\": {\"total_steps\": integer,
   \"steps\": [{\"step_number\": integer starting at 1,
               \"action_description\": string,
               \"tool\": {\"name\": string, \"purpose\": string, \"input_requirements\": [string]},
               \"dependencies\": [earlier step numbers],
               \"status\": \"pending\" | \"ongoing\" | \"success\" | \"failure\",
               \"output\": string}]}}

Rules:
- total_steps equals the number of steps.
- Exactly one step is ongoing at any time; all later steps are pending.
- An input requirement is either \"output from N\" for an earlier step N, or a literal file path supplied by the user.
- When asked to revise after a failure, keep every step before the failed one unchanged and change only what is needed from the failed step on.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    fn user(content: impl Into<String>) -> Self {
        Self {
            role: "user".into(),
            content: content.into(),
        }
    }

    fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: "assistant".into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub system: String,
    pub messages: Vec<ChatMessage>,
}

#[derive(Debug, Deserialize)]
struct ChatReply {
    content: String,
}

pub trait ChatTransport: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, String>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    pub system_prompt: String,
    pub timeout: Duration,
}

impl ExternalConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: "planner".into(),
            api_key: None,
            system_prompt: DEFAULT_SYSTEM_PROMPT.into(),
            timeout: Duration::from_secs(60),
        }
    }

    /// Reads `PLANACT_PLANNER_ENDPOINT` (required), `PLANACT_PLANNER_MODEL`,
    /// `PLANACT_PLANNER_API_KEY` and `PLANACT_PLANNER_SYSTEM_PROMPT_FILE`.
    pub fn from_env() -> Result<Self, PlannerError> {
        let endpoint = std::env::var("PLANACT_PLANNER_ENDPOINT")
            .map_err(|_| PlannerError::Endpoint("PLANACT_PLANNER_ENDPOINT is not set".into()))?;
        let mut config = Self::new(endpoint);
        if let Ok(model) = std::env::var("PLANACT_PLANNER_MODEL") {
            config.model = model;
        }
        config.api_key = std::env::var("PLANACT_PLANNER_API_KEY").ok();
        if let Ok(path) = std::env::var("PLANACT_PLANNER_SYSTEM_PROMPT_FILE") {
            config.system_prompt = std::fs::read_to_string(&path)
                .map_err(|e| PlannerError::Endpoint(format!("system prompt {path}: {e}")))?;
        }
        Ok(config)
    }
}

/// Blocking HTTP transport.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    endpoint: String,
    api_key: Option<String>,
}

impl HttpTransport {
    pub fn new(config: &ExternalConfig) -> Result<Self, PlannerError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| PlannerError::Endpoint(e.to_string()))?;
        Ok(Self {
            client,
            endpoint: config.endpoint.clone(),
            api_key: config.api_key.clone(),
        })
    }
}

impl ChatTransport for HttpTransport {
    fn complete(&self, request: &ChatRequest) -> Result<String, String> {
        let mut req = self.client.post(&self.endpoint).json(request);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let response = req.send().map_err(|e| e.to_string())?;
        let status = response.status();
        if !status.is_success() {
            return Err(format!("endpoint answered {status}"));
        }
        let reply: ChatReply = response.json().map_err(|e| format!("bad reply body: {e}"))?;
        Ok(reply.content)
    }
}

pub struct ExternalPlanner {
    transport: Box<dyn ChatTransport>,
    model: String,
    system_prompt: String,
    retries: AtomicU32,
}

impl ExternalPlanner {
    pub fn new(transport: Box<dyn ChatTransport>, config: &ExternalConfig) -> Self {
        Self {
            transport,
            model: config.model.clone(),
            system_prompt: config.system_prompt.clone(),
            retries: AtomicU32::new(0),
        }
    }

    pub fn http(config: &ExternalConfig) -> Result<Self, PlannerError> {
        Ok(Self::new(Box::new(HttpTransport::new(config)?), config))
    }

    /// Sends `first`, and once more with the error appended if the reply is
    /// not an acceptable plan.
    fn converse(&self, first: String, accept: impl Fn(&Plan) -> Result<(), String>) -> Result<Plan, PlannerError> {
        let mut messages = vec![ChatMessage::user(first)];
        let mut last_error = String::new();
        for attempt in 0..2 {
            if attempt > 0 {
                self.retries.fetch_add(1, Ordering::Relaxed);
            }
            let request = ChatRequest {
                model: self.model.clone(),
                system: self.system_prompt.clone(),
                messages: messages.clone(),
            };
            let reply = self.transport.complete(&request).map_err(PlannerError::Endpoint)?;
            let checked = parse_plan(extract_json(&reply))
                .map_err(|e| e.to_string())
                .and_then(|plan| accept(&plan).map(|()| plan));
            match checked {
                Ok(plan) => return Ok(plan),
                Err(e) => {
                    last_error = e;
                    messages.push(ChatMessage::assistant(reply));
                    messages.push(ChatMessage::user(format!(
                        "That reply was rejected: {last_error}\nAnswer again with only the corrected JSON plan."
                    )));
                }
            }
        }
        Err(PlannerError::PlanInvalid(last_error))
    }

    pub fn retry_count(&self) -> u32 {
        self.retries.load(Ordering::Relaxed)
    }
}

fn valid(plan: &Plan) -> Result<(), String> {
    let report = validate_plan(plan);
    if report.valid {
        Ok(())
    } else {
        Err(report.to_string())
    }
}

/// The outermost `{...}` span of `text`, which strips code fences and prose
/// around a single JSON object.
fn extract_json(text: &str) -> &str {
    match (text.find('{'), text.rfind('}')) {
        (Some(a), Some(b)) if a < b => &text[a..=b],
        _ => text,
    }
}

impl PlannerPolicy for ExternalPlanner {
    fn kind(&self) -> &'static str {
        "external"
    }

    fn propose_plan(&self, goal: &Goal, context: &MemoryContext) -> Result<Plan, PlannerError> {
        let mut text = format!("Goal: {}\n", goal.goal_text);
        if !goal.provided_materials.is_empty() {
            text.push_str(&format!("Provided files: {}\n", goal.provided_materials.join(", ")));
        }
        for (k, v) in &goal.constraints {
            text.push_str(&format!("{k}={v}\n"));
        }
        if !context.is_empty() {
            text.push_str("\nMemory:\n");
            text.push_str(&context.render());
        }
        self.converse(text, valid)
    }

    fn revise_plan(&self, plan: &Plan, failed_step: u32, error: &str) -> Result<Plan, PlannerError> {
        let text = format!(
            "Step {failed_step} failed with: {error}\nCurrent plan:\n{}\nReturn the revised plan.",
            serialize_plan(plan)
        );
        self.converse(text, valid)
    }

    fn retries(&self) -> u32 {
        self.retry_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    struct Canned(Mutex<Vec<String>>, Mutex<Vec<ChatRequest>>);

    impl Canned {
        fn new(replies: &[&str]) -> Self {
            Self(
                Mutex::new(replies.iter().rev().map(|s| s.to_string()).collect()),
                Mutex::new(Vec::new()),
            )
        }
    }

    impl ChatTransport for &'static Canned {
        fn complete(&self, request: &ChatRequest) -> Result<String, String> {
            self.1.lock().unwrap().push(request.clone());
            self.0.lock().unwrap().pop().ok_or_else(|| "no more replies".into())
        }
    }

    const PLAN: &str = r#"{"task_analysis": "t", "execution_plan": {"total_steps": 1, "steps": [
        {"step_number": 1, "action_description": "a cat", "tool": {"name": "text2video_gen", "purpose": "clip",
         "input_requirements": []}, "dependencies": [], "status": "ongoing", "output": ""}]}}"#;

    fn planner(replies: &[&str]) -> (ExternalPlanner, &'static Canned) {
        let canned: &'static Canned = Box::leak(Box::new(Canned::new(replies)));
        (ExternalPlanner::new(Box::new(canned), &ExternalConfig::new("http://unused")), canned)
    }

    #[test]
    fn fenced_reply_parses() {
        let fenced = format!("Here you go:\n```json\n{PLAN}\n```");
        let (p, canned) = planner(&[&fenced]);
        let plan = p.propose_plan(&Goal::new("a cat"), &MemoryContext::default()).unwrap();
        assert_eq!(plan.total_steps, 1);
        assert_eq!(p.retry_count(), 0);
        let sent = canned.1.lock().unwrap();
        assert_eq!(sent[0].system, DEFAULT_SYSTEM_PROMPT);
        assert!(sent[0].messages[0].content.starts_with("Goal: a cat"));
    }

    #[test]
    fn prose_then_json_retries_once() {
        let (p, canned) = planner(&["I think you should make a video.", PLAN]);
        assert!(p.propose_plan(&Goal::new("a cat"), &MemoryContext::default()).is_ok());
        assert_eq!(p.retry_count(), 1);
        let sent = canned.1.lock().unwrap();
        assert_eq!(sent[1].messages.len(), 3);
        assert!(sent[1].messages[2].content.contains("rejected"));
    }

    #[test]
    fn prose_twice_is_invalid() {
        let (p, _) = planner(&["no", "still no"]);
        assert!(matches!(
            p.propose_plan(&Goal::new("a cat"), &MemoryContext::default()),
            Err(PlannerError::PlanInvalid(_))
        ));
    }

    #[test]
    fn transport_error_surfaces() {
        let (p, _) = planner(&[]);
        assert!(matches!(
            p.propose_plan(&Goal::new("a cat"), &MemoryContext::default()),
            Err(PlannerError::Endpoint(_))
        ));
    }
}
