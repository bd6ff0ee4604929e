use std::path::{Path, PathBuf};

use planact_bench::card::load_cards;
use planact_bench::replay::replay_file;
use planact_bench::report::{render_json, render_table, SuiteReport};
use planact_bench::suite::{run_suite, SuiteConfig};
use planact_core::orchestrator::{MemoryFlags, SessionState};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn cards() -> PathBuf {
    fixtures().join("cards")
}

fn config(memory: MemoryFlags, failures: bool) -> SuiteConfig {
    SuiteConfig {
        memory,
        failures,
        seed: 11,
        memory_dir: Some(fixtures().join("memory")),
        ..SuiteConfig::default()
    }
}

#[test]
fn scripted_suite_matches_references() {
    let run = run_suite(&cards(), &config(MemoryFlags::ALL, false)).unwrap();
    let report = &run.report;
    assert_eq!(report.rows.len(), 50);
    assert_eq!(report.aggregates.success_rate, Some(1.0));
    assert_eq!(report.aggregates.mean_wped, Some(1.0));
    assert_eq!(report.aggregates.mean_replanq, None);
    assert!((report.aggregates.qa_accuracy.unwrap() - 0.76).abs() < 1e-9);
    assert!(report.rows.iter().all(|r| r.state == Some(SessionState::Completed) && r.error.is_none()));
    assert!(report.is_consistent());
    assert_eq!(run.transcripts.len(), 50);
    assert_eq!(run.memory.global_snapshot().len(), 6 + 50);
}

#[test]
fn task_memory_off_repeats_calls() {
    let on = run_suite(&cards(), &config(MemoryFlags::ALL, false)).unwrap().report;
    let off = run_suite(&cards(), &config(MemoryFlags { task: false, ..MemoryFlags::ALL }, false))
        .unwrap()
        .report;
    let hits: u32 = on.rows.iter().map(|r| r.memo_hits).sum();
    let repeats: u32 = off.rows.iter().map(|r| r.repeat_calls).sum();
    assert!(hits > 0);
    assert_eq!(repeats, hits);
    assert!(on.rows.iter().all(|r| r.repeat_calls == 0));
    assert!(off.rows.iter().all(|r| r.memo_hits == 0));
}

#[test]
fn retrieval_follows_memory_flags() {
    let all = run_suite(&cards(), &config(MemoryFlags::ALL, false)).unwrap().report;
    let none = run_suite(&cards(), &config(MemoryFlags::NONE, false)).unwrap().report;
    assert!(all.rows.iter().any(|r| r.retrieved_traces > 0));
    assert!(all.rows.iter().any(|r| r.retrieved_materials > 0));
    assert!(none.rows.iter().all(|r| r.retrieved_traces == 0 && r.retrieved_materials == 0));
}

#[test]
fn failures_replan_once_per_card() {
    let report = run_suite(&cards(), &config(MemoryFlags::ALL, true)).unwrap().report;
    for row in &report.rows {
        assert_eq!(row.replan_events, 1, "{}", row.card_id);
        let q = row.metrics.replanq.unwrap_or_else(|| panic!("{} has no replanq", row.card_id));
        assert!(q > 0.0 && q <= 1.0);
    }
}

#[test]
fn reports_are_byte_deterministic() {
    let a = run_suite(&cards(), &config(MemoryFlags::ALL, true)).unwrap();
    let b = run_suite(
        &cards(),
        &SuiteConfig {
            workers: 4,
            ..config(MemoryFlags::ALL, true)
        },
    )
    .unwrap();
    assert_eq!(render_json(&a.report), render_json(&b.report));
    assert_eq!(render_table(&a.report), render_table(&b.report));
    assert_eq!(a.transcripts, b.transcripts);
    assert!(a.memory.same_contents(&b.memory));
    let back: SuiteReport = serde_json::from_str(&render_json(&a.report)).unwrap();
    assert_eq!(back, a.report);
}

#[test]
fn replay_reproduces_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_suite(&cards(), &config(MemoryFlags::ALL, true)).unwrap();
    run.write_to(dir.path()).unwrap();
    let cards = load_cards(&cards()).unwrap();
    for (card, row) in cards.iter().zip(&run.report.rows) {
        let path = dir.path().join("transcripts").join(format!("{}.jsonl", card.card_id));
        let (session, metrics) = replay_file(&path, &card.reference_tools()).unwrap();
        assert_eq!(metrics, row.metrics, "{}", card.card_id);
        assert_eq!(session.state, SessionState::Completed);
        assert_eq!(session.counters.gateway_calls, row.gateway_calls);
        assert_eq!(session.counters.memo_hits, row.memo_hits);
    }
    let written = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert_eq!(written, render_json(&run.report));
}

#[test]
fn truncated_transcript_names_its_line() {
    let run = run_suite(&cards(), &config(MemoryFlags::ALL, false)).unwrap();
    let text = &run.transcripts["card_019"];
    let lines: Vec<&str> = text.lines().collect();
    let cut = lines.len() - 2;
    let mut truncated = lines[..cut].join("\n");
    truncated.push('\n');
    truncated.push_str(&lines[cut][..lines[cut].len() / 2]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    std::fs::write(&path, truncated).unwrap();
    match replay_file(&path, &[]) {
        Err(planact_bench::ReplayError::CorruptTrace { line, .. }) => assert_eq!(line, cut + 1),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn broken_fixture_is_named() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["card_001.json", "card_002.json"] {
        std::fs::copy(cards().join(name), dir.path().join(name)).unwrap();
    }
    std::fs::write(dir.path().join("card_003.json"), "{ not json").unwrap();
    let err = run_suite(dir.path(), &SuiteConfig::default()).err().unwrap();
    assert_eq!(err.card_id, "card_003");
}

#[test]
fn planner_errors_are_recorded_and_suite_continues() {
    let mut cards = load_cards(&cards()).unwrap();
    cards.truncate(3);
    let config = SuiteConfig {
        planner: planact_bench::PlannerKind::External,
        external: Some(planact_core::orchestrator::ExternalConfig::new("http://127.0.0.1:9/plan")),
        ..SuiteConfig::default()
    };
    let report = planact_bench::run_cards(&cards, &config).unwrap().report;
    assert_eq!(report.rows.len(), 3);
    for row in &report.rows {
        assert!(row.error.is_some() && row.state.is_none());
        assert!(!row.metrics.success);
        assert_eq!(row.metrics.wped, Some(0.0));
    }
    assert_eq!(report.aggregates.success_rate, Some(0.0));
    assert!(render_table(&report).contains("error"));
}
