//! Planner policies and the table-driven scripted planner.

use std::path::Path;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Goal;
use crate::memory::MemoryContext;
use crate::plan::{Plan, StepStatus, ToolBinding};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlannerError {
    #[error("no script matches goal: {0}")]
    NoScript(String),
    #[error("planner endpoint error: {0}")]
    Endpoint(String),
    #[error("planner returned an invalid plan: {0}")]
    PlanInvalid(String),
    #[error("bad script: {0}")]
    Script(String),
}

/// Produces and revises plans. Returned plans must validate, and a revision
/// must leave the steps before the failed one untouched.
pub trait PlannerPolicy: Send + Sync {
    fn kind(&self) -> &'static str;
    fn propose_plan(&self, goal: &Goal, context: &MemoryContext) -> Result<Plan, PlannerError>;
    fn revise_plan(&self, plan: &Plan, failed_step: u32, error: &str) -> Result<Plan, PlannerError>;
    /// Extra planner round trips spent on rejected replies so far.
    fn retries(&self) -> u32 {
        0
    }
}

/// Resets a plan to its not-yet-started state: outputs cleared, the first
/// step with no dependencies ongoing, every other step pending.
pub fn fresh(plan: &Plan) -> Plan {
    let mut out = plan.clone();
    for s in &mut out.steps {
        s.status = StepStatus::Pending;
        s.output.clear();
    }
    if let Some(first) = out.steps.iter_mut().find(|s| s.dependencies.is_empty()) {
        first.status = StepStatus::Ongoing;
    }
    out
}

// ── scripted planner ─────────────────────────────────────────

/// Revision rule applied to the failed step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ReviseRule {
    /// Swap the failed step's tool when it is `failed_tool`.
    Substitute {
        failed_tool: String,
        replacement: ToolBinding,
    },
    /// Re-emit the failed step with " (retry)" appended to its action.
    Retry,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptEntry {
    /// Case-insensitive regular expression matched against the goal text.
    pub pattern: String,
    pub plan: Plan,
}

#[derive(Debug, Clone, Default)]
pub struct ScriptedPlanner {
    entries: Vec<(Regex, Plan)>,
    rules: Vec<ReviseRule>,
}

impl ScriptedPlanner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn script(mut self, pattern: &str, plan: Plan) -> Result<Self, PlannerError> {
        let re = RegexBuilder::new(pattern)
            .case_insensitive(true)
            .build()
            .map_err(|e| PlannerError::Script(e.to_string()))?;
        self.entries.push((re, fresh(&plan)));
        Ok(self)
    }

    /// A script matching exactly `goal_text`.
    pub fn exact(self, goal_text: &str, plan: Plan) -> Self {
        let pattern = format!("^{}$", regex::escape(goal_text));
        self.script(&pattern, plan).expect("escaped pattern compiles")
    }

    pub fn rule(mut self, rule: ReviseRule) -> Self {
        self.rules.push(rule);
        self
    }

    pub fn from_entries(entries: Vec<ScriptEntry>) -> Result<Self, PlannerError> {
        entries
            .into_iter()
            .try_fold(Self::new(), |p, e| p.script(&e.pattern, e.plan))
    }

    /// Reads a JSON array of `{pattern, plan}` entries.
    pub fn from_file(path: &Path) -> Result<Self, PlannerError> {
        let text = std::fs::read_to_string(path).map_err(|e| PlannerError::Script(e.to_string()))?;
        let entries: Vec<ScriptEntry> =
            serde_json::from_str(&text).map_err(|e| PlannerError::Script(format!("{}: {e}", path.display())))?;
        Self::from_entries(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl PlannerPolicy for ScriptedPlanner {
    fn kind(&self) -> &'static str {
        "scripted"
    }

    fn propose_plan(&self, goal: &Goal, _context: &MemoryContext) -> Result<Plan, PlannerError> {
        self.entries
            .iter()
            .find(|(re, _)| re.is_match(&goal.goal_text))
            .map(|(_, plan)| plan.clone())
            .ok_or_else(|| PlannerError::NoScript(goal.goal_text.clone()))
    }

    fn revise_plan(&self, plan: &Plan, failed_step: u32, _error: &str) -> Result<Plan, PlannerError> {
        let mut next = plan.clone();
        let step = next
            .steps
            .iter_mut()
            .find(|s| s.step_number == failed_step && s.status == StepStatus::Failure)
            .ok_or_else(|| PlannerError::PlanInvalid(format!("step {failed_step} has not failed")))?;
        let rule = self
            .rules
            .iter()
            .find(|r| matches!(r, ReviseRule::Substitute { failed_tool, .. } if *failed_tool == step.tool.name))
            .unwrap_or(&ReviseRule::Retry);
        match rule {
            ReviseRule::Substitute { replacement, .. } => step.tool = replacement.clone(),
            ReviseRule::Retry => step.action_description.push_str(" (retry)"),
        }
        step.status = StepStatus::Ongoing;
        step.output.clear();
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{advance, validate_plan, StepOutcome};

    fn two_step() -> Plan {
        Plan::builder("clip then edit")
            .step("make a clip", ToolBinding::new("text2video_gen", "clip", &[]), &[])
            .step("recolor it", ToolBinding::new("recolor", "edit", &["output from 1"]), &[1])
            .build()
    }

    #[test]
    fn matches_case_insensitively() {
        let p = ScriptedPlanner::new().script("clip", two_step()).unwrap();
        let plan = p.propose_plan(&Goal::new("Make a CLIP please"), &MemoryContext::default()).unwrap();
        assert_eq!(plan, two_step());
        assert!(matches!(
            p.propose_plan(&Goal::new("nothing"), &MemoryContext::default()),
            Err(PlannerError::NoScript(_))
        ));
    }

    #[test]
    fn fresh_resets_progress() {
        let done = advance(&two_step(), &StepOutcome::success(1, "mock://a")).unwrap();
        assert_eq!(fresh(&done), two_step());
    }

    #[test]
    fn retry_rule_changes_only_failed_step() {
        let p = ScriptedPlanner::new();
        let s1 = advance(&two_step(), &StepOutcome::success(1, "mock://a")).unwrap();
        let failed = advance(&s1, &StepOutcome::failure(2, "boom")).unwrap();
        let revised = p.revise_plan(&failed, 2, "boom").unwrap();
        assert_eq!(revised.steps[0], failed.steps[0]);
        assert_eq!(revised.steps[1].action_description, "recolor it (retry)");
        assert_eq!(revised.steps[1].status, StepStatus::Ongoing);
        assert!(validate_plan(&revised).valid);
        assert_eq!(revised.tool_sequence(), failed.tool_sequence());
    }

    #[test]
    fn substitute_rule_swaps_tool() {
        let p = ScriptedPlanner::new().rule(ReviseRule::Substitute {
            failed_tool: "text2video_gen".into(),
            replacement: ToolBinding::new("image2video_gen", "fallback", &[]),
        });
        let failed = advance(&two_step(), &StepOutcome::failure(1, "down")).unwrap();
        let revised = p.revise_plan(&failed, 1, "down").unwrap();
        assert_eq!(revised.steps[0].tool.name, "image2video_gen");
        assert!(p.revise_plan(&two_step(), 1, "x").is_err());
    }

    #[test]
    fn script_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scripts.json");
        let entries = vec![ScriptEntry {
            pattern: "clip".into(),
            plan: two_step(),
        }];
        std::fs::write(&path, serde_json::to_string(&entries).unwrap()).unwrap();
        assert_eq!(ScriptedPlanner::from_file(&path).unwrap().len(), 1);
    }
}
