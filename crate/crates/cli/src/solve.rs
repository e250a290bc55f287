use std::io::Write;
use std::ops::ControlFlow;
use std::process::ExitCode;

use clap::Args;
use serde::Serialize;
use sparc_core::puzzle::{Placement, Solver};

use crate::{invalid, PuzzleArgs};

#[derive(Args)]
pub struct SolveArgs {
    #[command(flatten)]
    puzzle: PuzzleArgs,
    /// Number of tilings to print.
    #[arg(long, default_value_t = 1)]
    limit: u64,
    /// Enumerate every tiling and stream a running count instead.
    #[arg(long)]
    count: bool,
    /// Print a progress line every this many tilings while counting.
    #[arg(long, default_value_t = 1000)]
    every: u64,
}

#[derive(Serialize)]
struct Tiling<'a> {
    index: u64,
    placements: &'a [Placement],
}

#[derive(Serialize)]
struct Count {
    count: u64,
    done: bool,
}

pub fn run(args: SolveArgs) -> anyhow::Result<ExitCode> {
    let pieces = args.puzzle.load()?;
    let solver = Solver::new(&pieces, pieces.dim()).map_err(|e| invalid(e.to_string()))?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut io = Ok(());
    let found = if args.count {
        let every = args.every.max(1);
        let mut n = 0;
        let total = solver.for_each_solution(|_| {
            n += 1;
            if n % every == 0 {
                io = writeln!(out, "{}", serde_json::to_string(&Count { count: n, done: false }).unwrap())
                    .and_then(|_| out.flush());
            }
            if io.is_err() {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        io?;
        writeln!(out, "{}", serde_json::to_string(&Count { count: total, done: true })?)?;
        total
    } else {
        if args.limit == 0 {
            return Err(invalid("--limit must be at least 1"));
        }
        let mut index = 0;
        solver.for_each_solution(|s| {
            io = writeln!(out, "{}", serde_json::to_string(&Tiling { index, placements: &s.placements }).unwrap());
            index += 1;
            if index >= args.limit || io.is_err() {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        io?;
        index
    };
    if found == 0 {
        anyhow::bail!("no solution exists");
    }
    Ok(ExitCode::SUCCESS)
}
