//! Goal cards: one JSON file per benchmark instance.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use planact_core::hub::FailurePlan;
use planact_core::memory::UserMaterial;
use planact_core::orchestrator::{fresh, Goal};
use planact_core::plan::{validate_plan, Plan};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("fixture {card_id}: {message}")]
pub struct FixtureError {
    pub card_id: String,
    pub message: String,
}

impl FixtureError {
    fn new(card_id: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            card_id: card_id.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaItem {
    pub question: String,
    pub gold_answer: String,
    /// Answer recorded from the system under test when the card was built.
    pub recorded_answer: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserMemorySeed {
    #[serde(default)]
    pub materials: Vec<UserMaterial>,
    #[serde(default)]
    pub preferences: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalCard {
    pub card_id: String,
    /// Invented for the harness rather than drawn from a curated set.
    #[serde(default)]
    pub synthetic: bool,
    pub goal: Goal,
    pub reference_plan: Plan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_spec: Option<FailurePlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_memory: Option<UserMemorySeed>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub qa_items: Vec<QaItem>,
}

impl GoalCard {
    pub fn check(&self) -> Result<(), FixtureError> {
        if self.card_id.trim().is_empty() {
            return Err(FixtureError::new("?", "empty card_id"));
        }
        if self.goal.goal_text.trim().is_empty() {
            return Err(FixtureError::new(&self.card_id, "empty goal_text"));
        }
        let report = validate_plan(&self.reference_plan);
        if !report.valid {
            return Err(FixtureError::new(&self.card_id, format!("reference plan: {report}")));
        }
        if let Some(spec) = &self.failure_spec {
            if !spec.is_valid() {
                return Err(FixtureError::new(&self.card_id, "invalid failure_spec"));
            }
        }
        Ok(())
    }

    /// The reference plan in its not-yet-started state.
    pub fn script(&self) -> Plan {
        fresh(&self.reference_plan)
    }

    pub fn reference_tools(&self) -> Vec<String> {
        self.reference_plan.tool_sequence()
    }
}

pub fn load_card(path: &Path) -> Result<GoalCard, FixtureError> {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let text = std::fs::read_to_string(path).map_err(|e| FixtureError::new(&stem, e.to_string()))?;
    let card: GoalCard = serde_json::from_str(&text).map_err(|e| FixtureError::new(&stem, e.to_string()))?;
    card.check()?;
    Ok(card)
}

/// Every `*.json` card in `dir`, sorted by card_id.
pub fn load_cards(dir: &Path) -> Result<Vec<GoalCard>, FixtureError> {
    let entries = std::fs::read_dir(dir).map_err(|e| FixtureError::new(dir.display().to_string(), e.to_string()))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut cards = paths.iter().map(|p| load_card(p)).collect::<Result<Vec<_>, _>>()?;
    cards.sort_by(|a, b| a.card_id.cmp(&b.card_id));
    let mut seen = BTreeSet::new();
    for c in &cards {
        if !seen.insert(c.card_id.clone()) {
            return Err(FixtureError::new(&c.card_id, "duplicate card_id"));
        }
    }
    Ok(cards)
}
