use std::io::{BufReader, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use planact_bench::card::load_card;
use planact_bench::replay::replay_file;
use planact_bench::report::{render_report, Format};
use planact_bench::suite::{run_suite, PlannerKind, SuiteConfig};
use planact_core::hub::catalog::Category;
use planact_core::hub::transport::serve_lines;
use planact_core::hub::ToolHub;
use planact_core::metrics::{default_rules, MetricReport};
use planact_core::orchestrator::{ExternalConfig, MemoryFlags};
use planact_core::plan::parse_plan;

#[derive(Parser)]
#[command(name = "planact", version, about = "Plan-Act orchestration benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlannerArg {
    Scripted,
    External,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Table,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Table => Format::Table,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Run every goal card in a fixture directory.
    Run {
        fixture_dir: PathBuf,
        #[arg(long, value_enum, default_value = "scripted")]
        planner: PlannerArg,
        /// `all`, `none`, or a comma list of global,user,task.
        #[arg(long, default_value = "all")]
        memory: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "off")]
        failures: Switch,
        #[arg(long, default_value_t = 3)]
        max_replans: u32,
        /// Directory with global.jsonl / user.jsonl to start from.
        #[arg(long)]
        memory_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Writes report.json, report.txt and transcripts/ here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
        #[arg(long, env = "PLANACT_PLANNER_ENDPOINT")]
        endpoint: Option<String>,
        #[arg(long, env = "PLANACT_PLANNER_MODEL")]
        model: Option<String>,
    },
    /// Rebuild a session from its transcript and score it.
    Replay {
        transcript: PathBuf,
        /// Goal card whose reference plan scores the session.
        #[arg(long, conflicts_with = "reference")]
        card: Option<PathBuf>,
        /// Plan file used as the reference instead of a card.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Print the tool catalog as JSON.
    Catalog {
        #[arg(long)]
        category: Option<String>,
    },
    /// Score a predicted plan file against a reference plan file.
    Metrics {
        predicted: PathBuf,
        reference: PathBuf,
        /// Revised plan after a failure, for ReplanQ.
        #[arg(long, requires = "failed_step")]
        replanned: Option<PathBuf>,
        /// One-based step number that failed.
        #[arg(long)]
        failed_step: Option<usize>,
    },
    /// Serve the mock tool servers over stdin/stdout, one JSON message per line.
    ServeMock,
}

fn read_plan_tools(path: &PathBuf) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let plan = parse_plan(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(plan.tool_sequence())
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            fixture_dir,
            planner,
            memory,
            seed,
            failures,
            max_replans,
            memory_dir,
            workers,
            out,
            format,
            endpoint,
            model,
        } => {
            let Some(memory) = MemoryFlags::parse(&memory) else {
                bail!("bad --memory {memory:?}: use all, none or a comma list of global,user,task");
            };
            let planner = match planner {
                PlannerArg::Scripted => PlannerKind::Scripted,
                PlannerArg::External => PlannerKind::External,
            };
            let external = match (planner, endpoint) {
                (PlannerKind::External, Some(endpoint)) => {
                    let mut cfg = ExternalConfig::from_env().unwrap_or_else(|_| ExternalConfig::new(&endpoint));
                    cfg.endpoint = endpoint;
                    if let Some(model) = model {
                        cfg.model = model;
                    }
                    Some(cfg)
                }
                _ => None,
            };
            let config = SuiteConfig {
                planner,
                memory,
                seed,
                failures: matches!(failures, Switch::On),
                max_replans,
                memory_dir,
                workers,
                external,
            };
            let run = run_suite(&fixture_dir, &config)?;
            if let Some(out) = &out {
                run.write_to(out).with_context(|| format!("writing {}", out.display()))?;
            }
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(render_report(&run.report, format.into()).as_bytes())?;
        }
        Command::Replay {
            transcript,
            card,
            reference,
        } => {
            let reference = match (card, reference) {
                (Some(card), _) => load_card(&card)?.reference_tools(),
                (None, Some(plan)) => read_plan_tools(&plan)?,
                (None, None) => bail!("replay needs --card or --reference"),
            };
            let (session, metrics) = replay_file(&transcript, &reference)?;
            print_json(&serde_json::json!({
                "session_id": session.session_id,
                "state": session.state,
                "gateway_calls": session.counters.gateway_calls,
                "memo_hits": session.counters.memo_hits,
                "replan_events": session.replan_events.len(),
                "metrics": metrics,
            }))?;
        }
        Command::Catalog { category } => {
            let filter = match category {
                Some(c) => Some(Category::parse(&c).with_context(|| format!("unknown category {c:?}"))?),
                None => None,
            };
            print_json(&ToolHub::seeded().list_catalog(filter))?;
        }
        Command::Metrics {
            predicted,
            reference,
            replanned,
            failed_step,
        } => {
            let pred = read_plan_tools(&predicted)?;
            let reference = read_plan_tools(&reference)?;
            let mut replans = Vec::new();
            if let (Some(path), Some(step)) = (replanned, failed_step) {
                if step == 0 {
                    bail!("--failed-step is one-based");
                }
                replans.push((pred.clone(), read_plan_tools(&path)?, step - 1));
            }
            print_json(&MetricReport::score(&pred, &reference, &default_rules(), &replans))?;
        }
        Command::ServeMock => {
            serve_lines(BufReader::new(std::io::stdin().lock()), std::io::stdout().lock())?;
        }
    }
    Ok(())
}
