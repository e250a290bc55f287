use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::Args;
use serde::Serialize;
use sparc_core::net::{default_scripts, mapping_fixtures, parse_script, simulate, BotScript, BotSummary, SimConfig, TransportConfig};
use sparc_core::session::{MetricsReport, Session};
use sparc_core::{Condition, TableFrame};

use crate::{build_header, invalid, print_envelope, write_file, PuzzleArgs};

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    puzzle: PuzzleArgs,
    #[arg(long, default_value_t = Condition::Sparc)]
    condition: Condition,
    /// Seeds the simulated network (and the fixture points).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Base one-way delay in milliseconds.
    #[arg(long, default_value_t = 40)]
    latency: u64,
    /// Extra uniform delay in milliseconds, 0..=jitter.
    #[arg(long, default_value_t = 10)]
    jitter: u64,
    /// Probability of losing a pose message.
    #[arg(long, default_value_t = 0.01)]
    drop: f64,
    /// Directory of `*.bot` scripts, loaded in file name order. Without it the
    /// built-in assembler and instructor scripts are used.
    #[arg(long)]
    scripts: Option<PathBuf>,
    /// Number of built-in bots (one assembler, the rest instructors).
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=8))]
    bots: u8,
    /// Event log destination.
    #[arg(long, default_value = "sparc-sim.log")]
    log: PathBuf,
    /// Write the built-in scripts as `.bot` files into this directory and exit.
    #[arg(long, value_name = "DIR")]
    emit_scripts: Option<PathBuf>,
    /// Write reference-mapping conformance vectors to DIR/mapping.jsonl and exit.
    #[arg(long, value_name = "DIR", num_args = 0..=1, default_missing_value = "fixtures")]
    emit_fixtures: Option<PathBuf>,
}

#[derive(Serialize)]
struct SimReport<'a> {
    metrics: &'a MetricsReport,
    log: String,
    seed: u64,
    condition: Condition,
    finished: bool,
    converged: bool,
    end_ms: u64,
    sent: u64,
    dropped: u64,
    bots: &'a [BotSummary],
}

fn load_scripts(dir: &Path) -> anyhow::Result<Vec<BotScript>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bot"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(invalid(format!("{}: no .bot scripts", dir.display())));
    }
    files
        .iter()
        .map(|f| {
            let text = std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
            parse_script(&text).map_err(|e| invalid(format!("{}: {e}", f.display())))
        })
        .collect()
}

fn emit_fixtures(dir: &Path, seed: u64) -> anyhow::Result<()> {
    let mut text = String::new();
    for f in mapping_fixtures(&TableFrame::default(), seed) {
        text.push_str(&serde_json::to_string(&f)?);
        text.push('\n');
    }
    write_file(&dir.join("mapping.jsonl"), &text)
}

pub fn run(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    if let Some(dir) = &args.emit_fixtures {
        emit_fixtures(dir, args.seed)?;
        return Ok(ExitCode::SUCCESS);
    }
    let transport = TransportConfig { latency_ms: args.latency, jitter_ms: args.jitter, drop_rate: args.drop, seed: args.seed };
    transport.validate().map_err(invalid)?;

    let header = build_header(args.condition, args.puzzle.load()?)?;
    let builtin = || default_scripts(&header.solution, args.bots as usize - 1);
    if let Some(dir) = &args.emit_scripts {
        for s in builtin() {
            write_file(&dir.join(format!("{}.bot", s.name)), &s.to_string())?;
        }
        return Ok(ExitCode::SUCCESS);
    }
    let scripts = match &args.scripts {
        Some(dir) => load_scripts(dir)?,
        None => builtin(),
    };

    let session = Session::new(header).map_err(|e| invalid(e.to_string()))?;
    let out = simulate(session, scripts, SimConfig { transport, ..SimConfig::default() });
    write_file(&args.log, &out.log)?;
    print_envelope(
        "report",
        out.end_ms,
        SimReport {
            metrics: &out.metrics,
            log: args.log.display().to_string(),
            seed: args.seed,
            condition: args.condition,
            finished: out.finished,
            converged: out.converged,
            end_ms: out.end_ms,
            sent: out.sent,
            dropped: out.dropped,
            bots: &out.bots,
        },
    );
    if !out.converged {
        eprintln!("sparc: client snapshots did not converge");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}
