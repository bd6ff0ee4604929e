//! Benchmark harness: goal cards, suite runs, reports and transcript replay.

pub mod card;
pub mod replay;
pub mod report;
pub mod suite;

pub use card::{load_card, load_cards, FixtureError, GoalCard};
pub use replay::{replay_file, ReplayError};
pub use report::{render_json, render_report, render_table, Format, SuiteReport};
pub use suite::{run_cards, run_suite, PlannerKind, SuiteConfig, SuiteRun};
