use std::sync::Arc;
use std::thread;

use planact_core::hub::{arguments, FailurePlan, ToolCall, ToolHub};
use planact_core::memory::{MemoryPaths, MemoryStores, TraceOutcome};
use planact_core::orchestrator::{Goal, Orchestrator, RunConfig, ScriptedPlanner, SessionState};
use planact_core::plan::{Plan, ToolBinding};
use serde_json::json;

fn clip_plan() -> Plan {
    Plan::builder("clip")
        .step("a paper boat in rain", ToolBinding::new("text2video_gen", "clip", &[]), &[])
        .step("add a title", ToolBinding::new("add_subtitle", "title", &["output from 1"]), &[1])
        .step("restyle", ToolBinding::new("style_transfer", "look", &["output from 2"]), &[2])
        .build()
}

#[test]
fn recorded_trace_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let paths = MemoryPaths::in_dir(dir.path());
    {
        let memory = Arc::new(MemoryStores::open(paths.clone()).unwrap());
        let planner = Arc::new(ScriptedPlanner::new().script("boat", clip_plan()).unwrap());
        let o = Orchestrator::new(Arc::new(ToolHub::seeded()), memory, planner, RunConfig::default());
        let goal = Goal::new("paper boat video").constraint("text", "The Boat");
        let s = o.run_task(goal, "s1").unwrap();
        assert_eq!(s.state, SessionState::Completed);
    }
    let reopened = MemoryStores::open(paths).unwrap();
    let found = reopened.global_retrieve("a boat video", 1);
    assert_eq!(found[0].tool_sequence, vec!["text2video_gen", "add_subtitle", "style_transfer"]);
    assert_eq!(found[0].outcome, TraceOutcome::Completed);
}

#[test]
fn aborted_before_any_step_records_empty_sequence() {
    let memory = Arc::new(MemoryStores::new());
    let planner = Arc::new(ScriptedPlanner::new().script("boat", clip_plan()).unwrap());
    let config = RunConfig {
        max_replans: 0,
        ..RunConfig::default()
    };
    let o = Orchestrator::new(Arc::new(ToolHub::seeded()), memory.clone(), planner, config);
    o.hub().configure_failure(Some(FailurePlan::at_call_index(0)));
    let s = o.run_task(Goal::new("boat"), "s1").unwrap();
    assert_eq!(s.abort_reason.as_deref(), Some("replan budget of 0 exhausted"));
    let t = &memory.global_retrieve("boat", 1)[0];
    assert_eq!(t.outcome, TraceOutcome::Aborted);
    assert_eq!(t.tool_sequence, vec!["text2video_gen"]);
}

#[test]
fn memo_hit_equals_forced_reinvoke() {
    let hub = Arc::new(ToolHub::seeded());
    let memory = Arc::new(MemoryStores::new());
    let planner = Arc::new(ScriptedPlanner::new().script("boat", clip_plan()).unwrap());
    let o = Orchestrator::new(hub.clone(), memory.clone(), planner, RunConfig::default());
    o.run_task(Goal::new("boat"), "s1").unwrap();
    let args = arguments(json!({"prompt": "a paper boat in rain"}));
    let memo = memory.memo_lookup("s1", "text2video_gen", &args).unwrap();
    let fresh = hub
        .invoke(ToolCall::new("video_gen_server", "text2video_gen", args).in_session("s1", 1))
        .unwrap()
        .artifact
        .unwrap();
    assert!(memo.same_content(&fresh));
}

#[test]
fn concurrent_sessions_keep_per_session_indices() {
    let hub = Arc::new(ToolHub::seeded());
    hub.configure_failure(Some(FailurePlan::at_call_index(3)));
    let workers: Vec<_> = (0..8)
        .map(|w| {
            let hub = hub.clone();
            thread::spawn(move || {
                let sid = format!("w{w}");
                hub.open_session(&sid);
                (0..6)
                    .map(|i| {
                        let call = ToolCall::new(
                            "image_gen_server",
                            "text2image_generate",
                            arguments(json!({"prompt": format!("{sid} frame {i}")})),
                        )
                        .in_session(sid.clone(), 1);
                        hub.invoke(call).is_ok()
                    })
                    .collect::<Vec<bool>>()
            })
        })
        .collect();
    for w in workers {
        assert_eq!(w.join().unwrap(), vec![true, true, true, false, true, true]);
    }
    assert_eq!(hub.trace().len(), 48);
    for w in 0..8 {
        let ids: Vec<String> = hub.trace().for_session(&format!("w{w}")).into_iter().map(|r| r.call.call_id).collect();
        assert_eq!(ids, (0..6).map(|i| format!("w{w}#{i}")).collect::<Vec<_>>());
    }
}
