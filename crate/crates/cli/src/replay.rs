use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Args;
use serde::Serialize;
use sparc_core::session::{replay, MetricsReport, ReplayError};

use crate::{invalid, print_envelope};

#[derive(Args)]
pub struct ReplayArgs {
    /// Event log written by `serve` or `simulate`.
    log: PathBuf,
    /// Fail unless the log ends with a report equal to the recomputed one.
    #[arg(long)]
    check: bool,
}

#[derive(Serialize)]
struct ReplayReport<'a> {
    metrics: &'a MetricsReport,
    log: String,
    records: usize,
    truncated: bool,
    /// Whether the embedded report matches; absent when the log has none.
    embedded_match: Option<bool>,
}

pub fn run(args: ReplayArgs) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(&args.log).with_context(|| format!("reading {}", args.log.display()))?;
    let out = match replay(&text) {
        Ok(out) => out,
        Err(e @ (ReplayError::Corrupt { .. } | ReplayError::MissingHeader)) => {
            return Err(invalid(format!("{}: {e}", args.log.display())))
        }
        Err(e) => return Err(anyhow::Error::new(e).context(args.log.display().to_string())),
    };
    let embedded_match = out.embedded.as_ref().map(|m| *m == out.metrics);
    let clock = out.session.state().clock_ms;
    print_envelope(
        "report",
        clock,
        ReplayReport {
            metrics: &out.metrics,
            log: args.log.display().to_string(),
            records: out.records,
            truncated: out.truncated,
            embedded_match,
        },
    );
    if args.check {
        match embedded_match {
            Some(true) => {}
            Some(false) => {
                eprintln!("sparc: embedded report differs from the recomputed one");
                return Ok(ExitCode::from(1));
            }
            None => {
                eprintln!("sparc: the log carries no report to check");
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
