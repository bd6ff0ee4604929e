//! Suite reports and their JSON and fixed-width table renderings.

use std::fmt::Write as _;

use planact_core::metrics::MetricReport;
use planact_core::orchestrator::SessionState;
use serde::{Deserialize, Serialize};

use crate::suite::PlannerKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub planner: PlannerKind,
    pub memory: String,
    pub seed: u64,
    pub failures: bool,
    pub max_replans: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardRow {
    pub card_id: String,
    /// Absent when no plan was accepted.
    pub state: Option<SessionState>,
    pub metrics: MetricReport,
    pub qa_accuracy: Option<f64>,
    pub replan_events: u32,
    pub gateway_calls: u32,
    pub memo_hits: u32,
    pub repeat_calls: u32,
    pub retrieved_traces: u32,
    pub retrieved_materials: u32,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub mean_wped: Option<f64>,
    pub mean_depcov: Option<f64>,
    pub mean_replanq: Option<f64>,
    pub success_rate: Option<f64>,
    pub qa_accuracy: Option<f64>,
}

/// Published figures obtained with proprietary planners and real media
/// models. They are printed for orientation only; this harness runs
/// synthetic cards against mocks and does not reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValues {
    pub note: String,
    pub plan_act_wped: f64,
    pub single_agent_wped: f64,
    pub plan_act_success_rate: f64,
    pub single_agent_success_rate: f64,
    pub long_video_qa_accuracy: f64,
}

pub const REFERENCE_NOTE: &str =
    "published reference values from proprietary LLM planners and media models; not reproduced by this harness";

impl Default for ReferenceValues {
    fn default() -> Self {
        Self {
            note: REFERENCE_NOTE.into(),
            plan_act_wped: 0.117,
            single_agent_wped: 0.050,
            plan_act_success_rate: 0.45,
            single_agent_success_rate: 0.20,
            long_video_qa_accuracy: 0.76,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: ConfigEcho,
    pub rows: Vec<CardRow>,
    pub aggregates: Aggregates,
    pub reference_values: ReferenceValues,
}

impl SuiteReport {
    /// Whether the aggregates follow from the rows.
    pub fn is_consistent(&self) -> bool {
        crate::suite::aggregate(&self.rows) == self.aggregates
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Table,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "table" => Ok(Format::Table),
            other => Err(format!("unknown format {other:?} (json or table)")),
        }
    }
}

pub fn render_report(report: &SuiteReport, format: Format) -> String {
    match format {
        Format::Json => render_json(report),
        Format::Table => render_table(report),
    }
}

pub fn render_json(report: &SuiteReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into())
}

fn state_label(s: Option<SessionState>) -> &'static str {
    match s {
        None => "error",
        Some(SessionState::Completed) => "completed",
        Some(SessionState::Aborted) => "aborted",
        Some(SessionState::Planning) => "planning",
        Some(SessionState::Acting) => "acting",
        Some(SessionState::Replanning) => "replanning",
    }
}

pub fn render_table(report: &SuiteReport) -> String {
    let mut out = String::new();
    let c = &report.config;
    let _ = writeln!(
        out,
        "planner={:?} memory={} seed={} failures={} max_replans={}",
        c.planner, c.memory, c.seed, c.failures, c.max_replans
    );
    let _ = writeln!(
        out,
        "{:<12} {:<10} {:>6} {:>6} {:>7} {:>4} {:>6} {:>5} {:>5} {:>6}",
        "card", "state", "wped", "depcov", "replanq", "ok", "calls", "memo", "rep", "replan"
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{:<12} {:<10} {:>6} {:>6} {:>7} {:>4} {:>6} {:>5} {:>5} {:>6}",
            r.card_id,
            state_label(r.state),
            cell(r.metrics.wped),
            cell(r.metrics.depcov),
            cell(r.metrics.replanq),
            if r.metrics.success { "yes" } else { "no" },
            r.gateway_calls,
            r.memo_hits,
            r.repeat_calls,
            r.replan_events
        );
    }
    let a = &report.aggregates;
    let _ = writeln!(
        out,
        "mean wped={} depcov={} replanq={} success_rate={} qa_accuracy={}",
        cell(a.mean_wped),
        cell(a.mean_depcov),
        cell(a.mean_replanq),
        cell(a.success_rate),
        cell(a.qa_accuracy)
    );
    let v = &report.reference_values;
    let _ = writeln!(
        out,
        "reference ({}): wped {:.3} vs {:.3}, success rate {:.1}% vs {:.1}%, long-video QA {:.2}",
        v.note,
        v.plan_act_wped,
        v.single_agent_wped,
        v.plan_act_success_rate * 100.0,
        v.single_agent_success_rate * 100.0,
        v.long_video_qa_accuracy
    );
    out
}
