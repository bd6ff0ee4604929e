//! The plan structure exchanged between planner and actor.
//!
//! Wire format:
//!
//! ```text
//! { "task_analysis": ..., "execution_plan": { "total_steps": N, "steps": [
//!     { "step_number", "action_description", "tool": { "name", "purpose",
//!       "input_requirements" }, "dependencies", "status", "output" } ] } }
//! ```
//!
//! Parsing is strict: unknown keys at any level are rejected. Serialization
//! emits the keys in the order above with two-space indentation, so
//! `serialize_plan` is canonical.
//!
//! Status lifecycle, one ongoing step at a time:
//!
//! ```text
//! pending ──► ongoing ──► success
//!                │
//!                └──────► failure
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use crate::strict::{self, Obj};
use crate::validation::{Collector, SchemaError, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepStatus {
    Pending,
    Ongoing,
    Success,
    Failure,
}

impl StepStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            StepStatus::Pending => "pending",
            StepStatus::Ongoing => "ongoing",
            StepStatus::Success => "success",
            StepStatus::Failure => "failure",
        }
    }

    fn parse(text: &str) -> Option<Self> {
        match text {
            "pending" => Some(StepStatus::Pending),
            "ongoing" => Some(StepStatus::Ongoing),
            "success" => Some(StepStatus::Success),
            "failure" => Some(StepStatus::Failure),
            _ => None,
        }
    }

    /// Whether a step in this status carries an output.
    pub fn is_resolved(self) -> bool {
        matches!(self, StepStatus::Success | StepStatus::Failure)
    }
}

impl fmt::Display for StepStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolBinding {
    pub name: String,
    pub purpose: String,
    pub input_requirements: Vec<String>,
}

impl ToolBinding {
    pub fn new(name: impl Into<String>, purpose: impl Into<String>, inputs: &[&str]) -> Self {
        Self {
            name: name.into(),
            purpose: purpose.into(),
            input_requirements: inputs.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub step_number: u32,
    pub action_description: String,
    pub tool: ToolBinding,
    pub dependencies: Vec<u32>,
    pub status: StepStatus,
    pub output: String,
}

/// A reference of the form `output from N`.
pub fn output_reference(requirement: &str) -> Option<u32> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"(?i)^\s*output\s+from\s+(\d+)\s*$").unwrap());
    re.captures(requirement)
        .and_then(|c| c[1].parse::<u32>().ok())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub task_analysis: String,
    pub total_steps: u32,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanParseError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("schema error at {0}")]
    Schema(#[from] SchemaError),
}

impl PlanParseError {
    pub fn path(&self) -> Option<&str> {
        match self {
            PlanParseError::Syntax(_) => None,
            PlanParseError::Schema(e) => Some(&e.path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdvanceError {
    #[error("step {0} is not the ongoing step")]
    NotOngoing(u32),
    #[error("step {0} resolved with an empty output")]
    EmptyOutput(u32),
}

/// The actor's report for the ongoing step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub step_number: u32,
    pub success: bool,
    pub output: String,
}

impl StepOutcome {
    pub fn success(step_number: u32, output: impl Into<String>) -> Self {
        Self {
            step_number,
            success: true,
            output: output.into(),
        }
    }

    pub fn failure(step_number: u32, output: impl Into<String>) -> Self {
        Self {
            step_number,
            success: false,
            output: output.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PlanViolationCode {
    CountMismatch,
    StepNumbering,
    MultipleOngoing,
    NoOngoing,
    OngoingAfterFailure,
    NonSequential,
    ForwardDependency,
    InvalidDependency,
    UnmetDependency,
    UndeclaredReference,
    OutputStatusMismatch,
}

pub type PlanReport = ValidationReport<PlanViolationCode>;

impl Plan {
    /// Starts a fresh plan: step 1 ongoing, the rest pending.
    pub fn builder(task_analysis: impl Into<String>) -> PlanBuilder {
        PlanBuilder {
            task_analysis: task_analysis.into(),
            steps: Vec::new(),
        }
    }

    pub fn step(&self, step_number: u32) -> Option<&Step> {
        step_number
            .checked_sub(1)
            .and_then(|i| self.steps.get(i as usize))
            .filter(|s| s.step_number == step_number)
    }

    pub fn ongoing_step(&self) -> Option<&Step> {
        self.steps.iter().find(|s| s.status == StepStatus::Ongoing)
    }

    pub fn ongoing_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| s.status == StepStatus::Ongoing)
            .count()
    }

    /// Every step succeeded (vacuously true for an empty plan).
    pub fn is_complete(&self) -> bool {
        self.steps.iter().all(|s| s.status == StepStatus::Success)
    }

    pub fn failed_step(&self) -> Option<&Step> {
        self.steps.iter().find(|s| s.status == StepStatus::Failure)
    }

    pub fn tool_sequence(&self) -> Vec<String> {
        tool_sequence(self)
    }
}

pub struct PlanBuilder {
    task_analysis: String,
    steps: Vec<Step>,
}

impl PlanBuilder {
    pub fn step(mut self, action: impl Into<String>, tool: ToolBinding, dependencies: &[u32]) -> Self {
        let step_number = self.steps.len() as u32 + 1;
        self.steps.push(Step {
            step_number,
            action_description: action.into(),
            tool,
            dependencies: dependencies.to_vec(),
            status: if step_number == 1 {
                StepStatus::Ongoing
            } else {
                StepStatus::Pending
            },
            output: String::new(),
        });
        self
    }

    pub fn build(self) -> Plan {
        Plan {
            task_analysis: self.task_analysis,
            total_steps: self.steps.len() as u32,
            steps: self.steps,
        }
    }
}

// ── parsing ──────────────────────────────────────────────────

const PLAN_KEYS: &[&str] = &["task_analysis", "execution_plan"];
const EXECUTION_KEYS: &[&str] = &["total_steps", "steps"];
const STEP_KEYS: &[&str] = &[
    "step_number",
    "action_description",
    "tool",
    "dependencies",
    "status",
    "output",
];
const TOOL_KEYS: &[&str] = &["name", "purpose", "input_requirements"];

pub fn parse_plan(json_text: &str) -> Result<Plan, PlanParseError> {
    let value: Value =
        serde_json::from_str(json_text).map_err(|e| PlanParseError::Syntax(e.to_string()))?;
    Ok(plan_from_value(&value)?)
}

pub fn plan_from_value(value: &Value) -> Result<Plan, SchemaError> {
    let root = Obj::new(value, "")?;
    root.deny_unknown(PLAN_KEYS)?;
    let task_analysis = root.string("task_analysis")?;
    let exec = root.object("execution_plan")?;
    exec.deny_unknown(EXECUTION_KEYS)?;
    let total_steps = exec.uint("total_steps")?;
    let steps = exec
        .array("steps")?
        .into_iter()
        .map(|(path, v)| parse_step(v, &path))
        .collect::<Result<Vec<_>, _>>()?;
    if total_steps as usize != steps.len() {
        return Err(SchemaError::new(
            exec.path_of("total_steps"),
            format!(
                "count mismatch: total_steps is {total_steps} but steps has {} entries",
                steps.len()
            ),
        ));
    }
    Ok(Plan {
        task_analysis,
        total_steps,
        steps,
    })
}

fn parse_step(value: &Value, path: &str) -> Result<Step, SchemaError> {
    let obj = Obj::new(value, path)?;
    obj.deny_unknown(STEP_KEYS)?;
    let tool = obj.object("tool")?;
    tool.deny_unknown(TOOL_KEYS)?;
    let input_requirements = tool
        .array("input_requirements")?
        .into_iter()
        .map(|(p, v)| strict::as_string(v, &p))
        .collect::<Result<Vec<_>, _>>()?;
    let dependencies = obj
        .array("dependencies")?
        .into_iter()
        .map(|(p, v)| strict::as_uint(v, &p))
        .collect::<Result<Vec<_>, _>>()?;
    let status_text = obj.string("status")?;
    let status = StepStatus::parse(&status_text).ok_or_else(|| {
        SchemaError::new(
            obj.path_of("status"),
            format!("unknown status {status_text:?}; expected pending, ongoing, success or failure"),
        )
    })?;
    Ok(Step {
        step_number: obj.uint("step_number")?,
        action_description: obj.string("action_description")?,
        tool: ToolBinding {
            name: tool.string("name")?,
            purpose: tool.string("purpose")?,
            input_requirements,
        },
        dependencies,
        status,
        output: obj.string("output")?,
    })
}

// ── serialization ────────────────────────────────────────────

#[derive(Serialize)]
struct WirePlan<'a> {
    task_analysis: &'a str,
    execution_plan: WireExecution<'a>,
}

#[derive(Serialize)]
struct WireExecution<'a> {
    total_steps: u32,
    steps: &'a [Step],
}

impl Serialize for Plan {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        WirePlan {
            task_analysis: &self.task_analysis,
            execution_plan: WireExecution {
                total_steps: self.total_steps,
                steps: &self.steps,
            },
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Plan {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        plan_from_value(&value).map_err(serde::de::Error::custom)
    }
}

/// Canonical text: fixed key order, two-space indentation, no trailing newline.
pub fn serialize_plan(plan: &Plan) -> String {
    serde_json::to_string_pretty(plan).expect("plan serialization cannot fail")
}

// ── validation ───────────────────────────────────────────────

pub fn validate_plan(plan: &Plan) -> PlanReport {
    use PlanViolationCode::*;
    let mut out = Collector::new();

    if plan.total_steps as usize != plan.steps.len() {
        out.push(
            CountMismatch,
            None,
            format!(
                "total_steps is {} but there are {} steps",
                plan.total_steps,
                plan.steps.len()
            ),
        );
    }

    for (i, step) in plan.steps.iter().enumerate() {
        let expected = i as u32 + 1;
        if step.step_number != expected {
            out.push(
                StepNumbering,
                Some(step.step_number),
                format!("step at position {expected} is numbered {}", step.step_number),
            );
        }
    }

    let ongoing = plan.ongoing_count();
    let has_failure = plan.steps.iter().any(|s| s.status == StepStatus::Failure);
    let has_pending = plan.steps.iter().any(|s| s.status == StepStatus::Pending);
    if ongoing > 1 {
        for s in plan.steps.iter().filter(|s| s.status == StepStatus::Ongoing) {
            out.push(
                MultipleOngoing,
                Some(s.step_number),
                format!("{ongoing} steps are ongoing"),
            );
        }
    }
    if has_failure && ongoing > 0 {
        out.push(
            OngoingAfterFailure,
            plan.ongoing_step().map(|s| s.step_number),
            "a step is ongoing while another has failed",
        );
    }
    if !has_failure && has_pending && ongoing == 0 {
        out.push(NoOngoing, None, "unfinished plan has no ongoing step");
    }

    let mut seen_unfinished = false;
    for step in &plan.steps {
        if seen_unfinished && step.status != StepStatus::Pending {
            out.push(
                NonSequential,
                Some(step.step_number),
                format!("step is {} after an unfinished step", step.status),
            );
        }
        if step.status != StepStatus::Success {
            seen_unfinished = true;
        }
    }

    for (i, step) in plan.steps.iter().enumerate() {
        let position = i as u32 + 1;
        for &dep in &step.dependencies {
            if dep == 0 || dep as usize > plan.steps.len() {
                out.push(
                    InvalidDependency,
                    Some(step.step_number),
                    format!("dependency {dep} names no step"),
                );
            } else if dep >= position {
                out.push(
                    ForwardDependency,
                    Some(step.step_number),
                    format!("dependency {dep} is not earlier than step {position}"),
                );
            } else if matches!(step.status, StepStatus::Ongoing | StepStatus::Success)
                && plan.steps[dep as usize - 1].status != StepStatus::Success
            {
                out.push(
                    UnmetDependency,
                    Some(step.step_number),
                    format!(
                        "step is {} but dependency {dep} is {}",
                        step.status,
                        plan.steps[dep as usize - 1].status
                    ),
                );
            }
        }
        for req in &step.tool.input_requirements {
            if let Some(n) = output_reference(req) {
                if !step.dependencies.contains(&n) {
                    out.push(
                        UndeclaredReference,
                        Some(step.step_number),
                        format!("input {req:?} references step {n}, which is not a dependency"),
                    );
                }
            }
        }
        if step.status.is_resolved() == step.output.is_empty() {
            out.push(
                OutputStatusMismatch,
                Some(step.step_number),
                format!(
                    "status {} with {} output",
                    step.status,
                    if step.output.is_empty() { "empty" } else { "non-empty" }
                ),
            );
        }
    }

    out.finish()
}

// ── transitions ──────────────────────────────────────────────

/// Resolves the ongoing step and, on success, promotes the next runnable step.
pub fn advance(plan: &Plan, outcome: &StepOutcome) -> Result<Plan, AdvanceError> {
    let n = outcome.step_number;
    let idx = plan
        .steps
        .iter()
        .position(|s| s.step_number == n && s.status == StepStatus::Ongoing)
        .ok_or(AdvanceError::NotOngoing(n))?;
    if outcome.output.is_empty() {
        return Err(AdvanceError::EmptyOutput(n));
    }
    let mut next = plan.clone();
    {
        let step = &mut next.steps[idx];
        step.status = if outcome.success {
            StepStatus::Success
        } else {
            StepStatus::Failure
        };
        step.output = outcome.output.clone();
    }
    if outcome.success {
        let succeeded: BTreeSet<u32> = next
            .steps
            .iter()
            .filter(|s| s.status == StepStatus::Success)
            .map(|s| s.step_number)
            .collect();
        if let Some(promote) = next
            .steps
            .iter_mut()
            .filter(|s| s.status == StepStatus::Pending)
            .min_by_key(|s| s.step_number)
            .filter(|s| s.dependencies.iter().all(|d| succeeded.contains(d)))
        {
            promote.status = StepStatus::Ongoing;
        }
    }
    Ok(next)
}

/// Tool names in step order.
pub fn tool_sequence(plan: &Plan) -> Vec<String> {
    plan.steps.iter().map(|s| s.tool.name.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const EXAMPLE: &str = r#"{
  "task_analysis": "Brief description of the identified task type and approach",
  "execution_plan": {
    "total_steps": 2,
    "steps": [
      {
        "step_number": 1,
        "action_description": "What this step accomplishes",
        "tool": {
          "name": "tool_name",
          "purpose": "What this achieves",
          "input_requirements": [
            "required material 1",
            "required material 2"
          ]
        },
        "dependencies": [],
        "status": "ongoing",
        "output": ""
      },
      {
        "step_number": 2,
        "action_description": "Next action description",
        "tool": {
          "name": "tool_name",
          "purpose": "What this achieves",
          "input_requirements": [
            "output from 1"
          ]
        },
        "dependencies": [1],
        "status": "pending",
        "output": ""
      }
    ]
  }
}"#;

    fn three_step() -> Plan {
        Plan::builder("story")
            .step("make image", ToolBinding::new("text2image_generate", "keyframe", &[]), &[])
            .step(
                "animate",
                ToolBinding::new("image2video_gen", "clip", &["output from 1"]),
                &[1],
            )
            .step(
                "merge",
                ToolBinding::new("merge_video", "final", &["output from 2"]),
                &[2],
            )
            .build()
    }

    #[test]
    fn parses_two_step_example() {
        let plan = parse_plan(EXAMPLE).unwrap();
        assert_eq!(plan.total_steps, 2);
        assert_eq!(plan.steps[1].dependencies, vec![1]);
        assert_eq!(plan.steps[0].tool.input_requirements.len(), 2);
        assert!(validate_plan(&plan).valid);
    }

    #[test]
    fn empty_object_is_missing_task_analysis() {
        let err = parse_plan("{}").unwrap_err();
        assert_eq!(err.path(), Some("task_analysis"));
    }

    #[test]
    fn count_mismatch_is_schema_error() {
        let text = serialize_plan(&three_step()).replace("\"total_steps\": 3", "\"total_steps\": 2");
        let err = parse_plan(&text).unwrap_err();
        assert_eq!(err.path(), Some("execution_plan.total_steps"));
        assert!(err.to_string().contains("count mismatch"));
    }

    #[test]
    fn syntax_and_schema_errors_name_paths() {
        assert!(matches!(parse_plan("{"), Err(PlanParseError::Syntax(_))));
        let extra = EXAMPLE.replacen("\"output\": \"\"", "\"output\": \"\", \"note\": 1", 1);
        assert_eq!(
            parse_plan(&extra).unwrap_err().path(),
            Some("execution_plan.steps[0].note")
        );
        let bad_status = EXAMPLE.replacen("\"pending\"", "\"skipped\"", 1);
        assert_eq!(
            parse_plan(&bad_status).unwrap_err().path(),
            Some("execution_plan.steps[1].status")
        );
        let bad_dep = EXAMPLE.replacen("[1]", "[\"1\"]", 1);
        assert_eq!(
            parse_plan(&bad_dep).unwrap_err().path(),
            Some("execution_plan.steps[1].dependencies[0]")
        );
        let extra_top = EXAMPLE.replacen('{', "{\"comment\": \"x\",", 1);
        assert_eq!(parse_plan(&extra_top).unwrap_err().path(), Some("comment"));
    }

    #[test]
    fn fresh_plan_is_valid() {
        assert!(validate_plan(&three_step()).valid);
    }

    #[test]
    fn two_ongoing_steps_flagged() {
        let mut plan = three_step();
        plan.steps[1].status = StepStatus::Ongoing;
        let report = validate_plan(&plan);
        assert!(!report.valid);
        assert!(report.has(&PlanViolationCode::MultipleOngoing));
    }

    #[test]
    fn forward_dependency_flagged() {
        let mut plan = three_step();
        plan.steps[0].dependencies = vec![2];
        let report = validate_plan(&plan);
        assert!(report.has(&PlanViolationCode::ForwardDependency));
        plan.steps[0].dependencies = vec![1];
        assert!(validate_plan(&plan).has(&PlanViolationCode::ForwardDependency));
        plan.steps[0].dependencies = vec![0];
        assert!(validate_plan(&plan).has(&PlanViolationCode::InvalidDependency));
    }

    #[test]
    fn other_violations() {
        let mut plan = three_step();
        plan.steps[2].dependencies = vec![];
        assert!(validate_plan(&plan).has(&PlanViolationCode::UndeclaredReference));

        let mut plan = three_step();
        plan.steps[0].status = StepStatus::Pending;
        assert!(validate_plan(&plan).has(&PlanViolationCode::NoOngoing));

        let mut plan = three_step();
        plan.steps[0].output = "early".into();
        assert!(validate_plan(&plan).has(&PlanViolationCode::OutputStatusMismatch));

        let mut plan = three_step();
        plan.steps[1].step_number = 7;
        assert!(validate_plan(&plan).has(&PlanViolationCode::StepNumbering));

        let mut plan = three_step();
        plan.total_steps = 5;
        assert!(validate_plan(&plan).has(&PlanViolationCode::CountMismatch));

        let mut plan = three_step();
        plan.steps[0].status = StepStatus::Pending;
        plan.steps[1].status = StepStatus::Ongoing;
        let report = validate_plan(&plan);
        assert!(report.has(&PlanViolationCode::UnmetDependency));
        assert!(report.has(&PlanViolationCode::NonSequential));
    }

    #[test]
    fn advance_promotes_next_step() {
        let plan = parse_plan(EXAMPLE).unwrap();
        let next = advance(&plan, &StepOutcome::success(1, "mock://a")).unwrap();
        assert_eq!(next.steps[0].status, StepStatus::Success);
        assert_eq!(next.steps[0].output, "mock://a");
        assert_eq!(next.steps[1].status, StepStatus::Ongoing);
        assert!(validate_plan(&next).valid);
    }

    #[test]
    fn single_step_plan_completes() {
        let plan = Plan::builder("one")
            .step("clip", ToolBinding::new("text2video_gen", "clip", &[]), &[])
            .build();
        let next = advance(&plan, &StepOutcome::success(1, "mock://v")).unwrap();
        assert_eq!(next.ongoing_count(), 0);
        assert!(next.is_complete());
    }

    #[test]
    fn failure_promotes_nothing() {
        let plan = parse_plan(EXAMPLE).unwrap();
        let next = advance(&plan, &StepOutcome::failure(1, "server down")).unwrap();
        assert_eq!(next.steps[0].status, StepStatus::Failure);
        assert_eq!(next.steps[1].status, StepStatus::Pending);
        assert_eq!(next.ongoing_count(), 0);
        assert!(validate_plan(&next).valid);
    }

    #[test]
    fn advance_rejects_non_ongoing() {
        let plan = parse_plan(EXAMPLE).unwrap();
        assert_eq!(
            advance(&plan, &StepOutcome::success(2, "x")),
            Err(AdvanceError::NotOngoing(2))
        );
        assert_eq!(
            advance(&plan, &StepOutcome::success(1, "")),
            Err(AdvanceError::EmptyOutput(1))
        );
    }

    #[test]
    fn empty_plan_is_complete() {
        let plan = Plan::builder("nothing").build();
        assert!(validate_plan(&plan).valid);
        assert!(plan.is_complete());
        assert!(tool_sequence(&plan).is_empty());
    }

    #[test]
    fn tool_sequences() {
        let plan = parse_plan(EXAMPLE).unwrap();
        assert_eq!(tool_sequence(&plan), vec!["tool_name", "tool_name"]);
        assert_eq!(
            tool_sequence(&three_step()),
            vec!["text2image_generate", "image2video_gen", "merge_video"]
        );
    }

    #[test]
    fn example_round_trip_is_byte_stable() {
        let once = serialize_plan(&parse_plan(EXAMPLE).unwrap());
        let twice = serialize_plan(&parse_plan(&once).unwrap());
        assert_eq!(once, twice);
        assert_eq!(parse_plan(&once).unwrap(), parse_plan(EXAMPLE).unwrap());
    }

    #[test]
    fn permuted_keys_serialize_identically() {
        let permuted = r#"{"execution_plan": {"steps": [{"output": "", "status": "ongoing",
            "dependencies": [], "tool": {"input_requirements": ["required material 1",
            "required material 2"], "purpose": "What this achieves", "name": "tool_name"},
            "action_description": "What this step accomplishes", "step_number": 1},
            {"status": "pending", "output": "", "dependencies": [1], "step_number": 2,
            "tool": {"purpose": "What this achieves", "name": "tool_name",
            "input_requirements": ["output from 1"]},
            "action_description": "Next action description"}], "total_steps": 2},
            "task_analysis": "Brief description of the identified task type and approach"}"#;
        assert_eq!(
            serialize_plan(&parse_plan(permuted).unwrap()),
            serialize_plan(&parse_plan(EXAMPLE).unwrap())
        );
    }

    #[test]
    fn output_reference_grammar() {
        assert_eq!(output_reference("output from 3"), Some(3));
        assert_eq!(output_reference("Output From 12"), Some(12));
        assert_eq!(output_reference("output from step 3"), None);
        assert_eq!(output_reference("/data/cat.png"), None);
    }
}
