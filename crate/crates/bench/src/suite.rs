//! Runs every goal card as one session and scores it.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;

use planact_core::canonical::call_digest;
use planact_core::hub::{FailureMode, ToolHub};
use planact_core::memory::{GlobalStore, MemoryPaths, MemoryStores};
use planact_core::metrics::{default_rules, qa_accuracy, success_rate, MetricReport};
use planact_core::orchestrator::{
    ExternalConfig, ExternalPlanner, MemoryFlags, Orchestrator, PlannerPolicy, RunConfig, ScriptedPlanner, Session,
    SessionState,
};
use serde::{Deserialize, Serialize};

use crate::card::{load_cards, FixtureError, GoalCard};
use crate::report::{Aggregates, CardRow, ConfigEcho, ReferenceValues, SuiteReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Scripted,
    External,
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub planner: PlannerKind,
    pub memory: MemoryFlags,
    pub seed: u64,
    pub failures: bool,
    pub max_replans: u32,
    /// Directory holding `global.jsonl` / `user.jsonl` to start from.
    pub memory_dir: Option<PathBuf>,
    pub workers: usize,
    pub external: Option<ExternalConfig>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            planner: PlannerKind::Scripted,
            memory: MemoryFlags::ALL,
            seed: 0,
            failures: false,
            max_replans: RunConfig::default().max_replans,
            memory_dir: None,
            workers: 1,
            external: None,
        }
    }
}

impl SuiteConfig {
    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            planner: self.planner,
            memory: self.memory.label(),
            seed: self.seed,
            failures: self.failures,
            max_replans: self.max_replans,
        }
    }
}

/// A finished suite: the report plus each card's session transcript.
pub struct SuiteRun {
    pub report: SuiteReport,
    pub transcripts: BTreeMap<String, String>,
    /// Global memory after the suite recorded every card's trace.
    pub memory: Arc<MemoryStores>,
}

impl SuiteRun {
    /// Writes `report.json`, `report.txt` and `transcripts/<card_id>.jsonl`.
    pub fn write_to(&self, out: &Path) -> std::io::Result<()> {
        let dir = out.join("transcripts");
        std::fs::create_dir_all(&dir)?;
        std::fs::write(out.join("report.json"), crate::report::render_json(&self.report))?;
        std::fs::write(out.join("report.txt"), crate::report::render_table(&self.report))?;
        for (card_id, text) in &self.transcripts {
            std::fs::write(dir.join(format!("{card_id}.jsonl")), text)?;
        }
        Ok(())
    }
}

pub fn run_suite(fixture_dir: &Path, config: &SuiteConfig) -> Result<SuiteRun, FixtureError> {
    let cards = load_cards(fixture_dir)?;
    run_cards(&cards, config)
}

pub fn run_cards(cards: &[GoalCard], config: &SuiteConfig) -> Result<SuiteRun, FixtureError> {
    let start_memory = match &config.memory_dir {
        Some(dir) => MemoryStores::load(&MemoryPaths::in_dir(dir)).map_err(|e| FixtureError {
            card_id: dir.display().to_string(),
            message: e.to_string(),
        })?,
        None => MemoryStores::new(),
    };
    let snapshot = start_memory.global_snapshot();
    let external: Option<Arc<dyn PlannerPolicy>> = match config.planner {
        PlannerKind::Scripted => None,
        PlannerKind::External => {
            let cfg = match &config.external {
                Some(c) => c.clone(),
                None => ExternalConfig::from_env().map_err(|e| FixtureError {
                    card_id: "external".into(),
                    message: e.to_string(),
                })?,
            };
            Some(Arc::new(ExternalPlanner::http(&cfg).map_err(|e| FixtureError {
                card_id: "external".into(),
                message: e.to_string(),
            })?))
        }
    };

    let workers = config.workers.max(1).min(cards.len().max(1));
    let mut results: Vec<(CardRow, Option<Session>)> = Vec::with_capacity(cards.len());
    thread::scope(|scope| {
        let chunks: Vec<Vec<&GoalCard>> = (0..workers)
            .map(|w| cards.iter().skip(w).step_by(workers).collect())
            .collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                let snapshot = &snapshot;
                let external = external.clone();
                scope.spawn(move || {
                    chunk
                        .into_iter()
                        .map(|card| run_card(card, config, snapshot, external.clone()))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            results.extend(h.join().expect("suite worker panicked"));
        }
    });
    results.sort_by(|a, b| a.0.card_id.cmp(&b.0.card_id));

    let memory = Arc::new(start_memory);
    let mut transcripts = BTreeMap::new();
    let mut rows = Vec::with_capacity(results.len());
    for (row, session) in results {
        if let Some(session) = session {
            if config.memory.global && session.state.is_terminal() {
                let _ = memory.record_trace(&session, row.metrics.wped);
            }
            transcripts.insert(row.card_id.clone(), session.transcript_jsonl());
        }
        rows.push(row);
    }
    let aggregates = aggregate(&rows);
    Ok(SuiteRun {
        report: SuiteReport {
            config: config.echo(),
            rows,
            aggregates,
            reference_values: ReferenceValues::default(),
        },
        transcripts,
        memory,
    })
}

fn run_card(
    card: &GoalCard,
    config: &SuiteConfig,
    global: &GlobalStore,
    external: Option<Arc<dyn PlannerPolicy>>,
) -> (CardRow, Option<Session>) {
    let hub = Arc::new(ToolHub::seeded());
    if config.failures {
        if let Some(mut spec) = card.failure_spec.clone() {
            if matches!(spec.mode, FailureMode::Probability(_)) {
                spec.seed ^= config.seed;
            }
            hub.configure_failure(Some(spec));
        }
    }
    let memory = Arc::new(MemoryStores::new());
    for t in global.traces() {
        let _ = memory.add_trace(&t.goal_text, t.tool_sequence.clone(), t.outcome, t.score);
    }
    if let Some(seed) = &card.user_memory {
        for m in &seed.materials {
            let _ = memory.add_material(m.clone());
        }
        for (k, v) in &seed.preferences {
            memory.set_preference(k, v);
        }
    }
    let planner: Arc<dyn PlannerPolicy> = match external {
        Some(p) => p,
        None => Arc::new(ScriptedPlanner::new().exact(&card.goal.goal_text, card.script())),
    };
    let run_config = RunConfig {
        max_replans: config.max_replans,
        memory: config.memory,
        retrieval_k: RunConfig::default().retrieval_k,
        record_global: false,
    };
    let orchestrator = Orchestrator::new(hub, memory, planner, run_config);
    let reference = card.reference_tools();
    let qa = qa_score(card);
    match orchestrator.run_task(card.goal.clone(), &card.card_id) {
        Ok(session) => {
            let metrics = score_session(&session, &reference);
            (row_for(card, &session, metrics, qa), Some(session))
        }
        Err(e) => {
            let mut metrics = MetricReport::score::<String>(&[], &reference, &default_rules(), &[]);
            metrics.notes.push(e.to_string());
            let row = CardRow {
                card_id: card.card_id.clone(),
                state: None,
                metrics,
                qa_accuracy: qa,
                replan_events: 0,
                gateway_calls: 0,
                memo_hits: 0,
                repeat_calls: 0,
                retrieved_traces: 0,
                retrieved_materials: 0,
                error: Some(e.to_string()),
            };
            (row, None)
        }
    }
}

/// Scores a session's first accepted plan against `reference`; ReplanQ is
/// the mean over its re-planning events.
pub fn score_session(session: &Session, reference: &[String]) -> MetricReport {
    let predicted = session
        .initial_plan
        .as_ref()
        .map(|p| p.tool_sequence())
        .unwrap_or_default();
    let replans: Vec<(Vec<String>, Vec<String>, usize)> = session
        .replan_events
        .iter()
        .map(|e| (e.old_plan.tool_sequence(), e.new_plan.tool_sequence(), e.failure_index()))
        .collect();
    let mut report = MetricReport::score(&predicted, reference, &default_rules(), &replans);
    if session.state == SessionState::Aborted {
        report
            .notes
            .push(format!("aborted: {}", session.abort_reason.clone().unwrap_or_default()));
    }
    report
}

fn qa_score(card: &GoalCard) -> Option<f64> {
    if card.qa_items.is_empty() {
        return None;
    }
    let predicted: Vec<&str> = card.qa_items.iter().map(|q| q.recorded_answer.as_str()).collect();
    let gold: Vec<&str> = card.qa_items.iter().map(|q| q.gold_answer.as_str()).collect();
    qa_accuracy(&predicted, &gold).ok()
}

/// Gateway calls whose tool and arguments already appeared earlier in the
/// session.
fn repeat_calls(session: &Session) -> u32 {
    let mut seen = BTreeSet::new();
    let mut repeats = 0;
    for r in session.trace_records().into_iter().filter(|r| r.is_top_level()) {
        if !seen.insert(call_digest(&r.call.tool_name, &r.call.arguments)) {
            repeats += 1;
        }
    }
    repeats
}

fn row_for(card: &GoalCard, session: &Session, metrics: MetricReport, qa: Option<f64>) -> CardRow {
    CardRow {
        card_id: card.card_id.clone(),
        state: Some(session.state),
        metrics,
        qa_accuracy: qa,
        replan_events: session.replan_events.len() as u32,
        gateway_calls: session.counters.gateway_calls,
        memo_hits: session.counters.memo_hits,
        repeat_calls: repeat_calls(session),
        retrieved_traces: session.counters.retrieved_traces,
        retrieved_materials: session.counters.retrieved_materials,
        error: None,
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn aggregate(rows: &[CardRow]) -> Aggregates {
    let reports: Vec<MetricReport> = rows.iter().map(|r| r.metrics.clone()).collect();
    Aggregates {
        mean_wped: mean(rows.iter().filter_map(|r| r.metrics.wped)),
        mean_depcov: mean(rows.iter().filter_map(|r| r.metrics.depcov)),
        mean_replanq: mean(rows.iter().filter_map(|r| r.metrics.replanq)),
        success_rate: success_rate(&reports).ok(),
        qa_accuracy: mean(rows.iter().filter_map(|r| r.qa_accuracy)),
    }
}
