//! `sparc`: run a session server, simulate bot sessions, replay logs and solve puzzles.
//!
//! Exit codes: 0 ok, 1 runtime failure, 2 usage or validation error.

mod replay;
mod serve;
mod simulate;
mod solve;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sparc_core::puzzle::{load_piece_set, PieceSet};
use sparc_core::session::SessionHeader;
use sparc_core::{Condition, TableFrame};

const BEDLAM: &str = include_str!("../../../data/bedlam.txt");

#[derive(Parser)]
#[command(name = "sparc", version, about = "Shared-perspective collaboration server and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Accept WebSocket clients at ws://<host>:<port>/session/<name>.
    Serve(serve::ServeArgs),
    /// Run a server and scripted bots on a virtual clock.
    Simulate(simulate::SimulateArgs),
    /// Recompute the metrics report from an event log.
    Replay(replay::ReplayArgs),
    /// Enumerate tilings of a piece set.
    Solve(solve::SolveArgs),
}

#[derive(Args, Clone)]
pub struct PuzzleArgs {
    /// Piece set file; the built-in 13-piece set when omitted.
    #[arg(long)]
    pub pieces: Option<PathBuf>,
}

impl PuzzleArgs {
    pub fn load(&self) -> anyhow::Result<PieceSet> {
        match &self.pieces {
            None => load_piece_set(BEDLAM).map_err(|e| invalid(format!("built-in pieces: {e}"))),
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                load_piece_set(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
            }
        }
    }
}

/// Session header for the default table.
pub fn build_header(condition: Condition, pieces: PieceSet) -> anyhow::Result<SessionHeader> {
    SessionHeader::build(condition, TableFrame::default(), pieces).map_err(|e| invalid(e.to_string()))
}

/// An error caused by the caller's input rather than by the run itself.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Invalid(msg.into()))
}

/// Output record in the wire envelope layout.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub t: &'a str,
    pub seq: u64,
    pub ts: u64,
    pub body: T,
}

pub fn print_envelope<T: Serialize>(t: &str, ts: u64, body: T) {
    let line = serde_json::to_string(&Envelope { t, seq: 1, ts, body }).expect("reports serialize");
    println!("{line}");
}

pub fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve(a) => serve::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Replay(a) => replay::run(a),
        Command::Solve(a) => solve::run(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("sparc: {e:#}");
            if e.downcast_ref::<Invalid>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
