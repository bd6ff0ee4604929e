//! Plan-Act orchestration kernel.
//!
//! A planner turns a goal into a numbered [`plan::Plan`]; an actor executes
//! exactly one ongoing step at a time through the [`hub::ToolHub`] gateway,
//! which dispatches to deterministic mock tool servers and keeps an
//! append-only trace. The [`memory`] module provides global traces, per-session
//! task memory and user materials. [`metrics`] scores plans against expert
//! references (wPED, DepCov, ReplanQ, success rate, QA accuracy, judge votes).

pub mod canonical;
pub mod hub;
pub mod memory;
pub mod metrics;
pub mod orchestrator;
pub mod plan;
pub mod storyboard;
pub mod validation;

mod strict;

pub use hub::{Artifact, ArtifactKind, ToolCall, ToolDescriptor, ToolHub, ToolResult, TraceRecord};
pub use memory::MemoryStores;
pub use orchestrator::{Goal, Orchestrator, RunConfig, Session, SessionState};
pub use plan::{Plan, Step, StepStatus, ToolBinding};
pub use storyboard::Storyboard;
pub use validation::{ValidationReport, Violation};
