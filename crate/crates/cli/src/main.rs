mod experiment;
mod source;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use netdecomp::netdecomp::Mode;
use serde_json::json;

use experiment::{run_experiment, Algo, ExperimentConfig};
use source::{parse_seeds, GraphSource};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Simulated,
    Central,
}

/// Network decomposition experiments in a simulated CONGEST network.
#[derive(Debug, Parser)]
#[command(name = "netdecomp", version)]
struct Args {
    /// Graph file: edge list, or JSON when the name ends in `.json`.
    #[arg(long, conflicts_with = "gen")]
    graph: Option<PathBuf>,
    /// Generator, e.g. `gnp:n=500,p=0.02`, `grid:rows=8,cols=8`, `path:n=9`.
    #[arg(long)]
    gen: Option<String>,
    #[arg(long, value_enum, default_value = "netdecomp")]
    algo: Algo,
    /// Power of the graph to decompose; neighborhood radius for covers.
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// `3`, `0,4,7` or `0..10`.
    #[arg(long, default_value = "0")]
    seeds: String,
    /// Per-edge, per-round message budget in bits.
    #[arg(long)]
    msg_bits: Option<usize>,
    /// MST-radius handed to every node; computed when absent.
    #[arg(long)]
    mu: Option<u32>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fail on any message over budget instead of counting it.
    #[arg(long)]
    strict: bool,
    #[arg(long, value_enum, default_value = "simulated")]
    mode: ModeArg,
    /// Verify mode: artifact JSON to check.
    #[arg(long)]
    artifact: Option<PathBuf>,
    /// Include each run's full output in the report.
    #[arg(long)]
    full: bool,
    /// Check every bundled valid and invalid fixture.
    #[arg(long)]
    fixture_suite: bool,
}

fn write(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main_inner(args: Args) -> Result<i32> {
    if args.fixture_suite {
        let outcomes = verify::run_fixture_suite()?;
        let failed = outcomes.iter().filter(|o| !o.pass).count();
        let report = json!({
            "schema": "netdecomp-fixtures",
            "version": experiment::VERSION,
            "fixtures": outcomes,
            "failed": failed,
        });
        write(&args.out, &serde_json::to_string_pretty(&report)?)?;
        return Ok(i32::from(failed > 0));
    }
    let source = match (&args.graph, &args.gen) {
        (Some(p), None) => Some(GraphSource::file(p)),
        (None, Some(s)) => Some(GraphSource::generator(s)?),
        (None, None) => None,
        (Some(_), Some(_)) => bail!("--graph and --gen are exclusive"),
    };
    let artifact = match &args.artifact {
        Some(p) => {
            Some(std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
        }
        None => None,
    };
    let cfg = ExperimentConfig {
        source,
        algo: args.algo,
        k: args.k,
        seeds: parse_seeds(&args.seeds)?,
        msg_bits: args.msg_bits,
        mu: args.mu,
        strict: args.strict,
        mode: match args.mode {
            ModeArg::Simulated => Mode::Simulated,
            ModeArg::Central => Mode::Central,
        },
        full: args.full,
        artifact,
    };
    let report = run_experiment(&cfg)?;
    write(&args.out, &serde_json::to_string_pretty(&report)?)?;
    for r in report.runs.iter().filter(|r| !r.valid) {
        match &r.error {
            Some(e) => eprintln!("seed {}: error: {e}", r.seed),
            None => eprintln!("seed {}: invalid: {}", r.seed, r.failures.join("; ")),
        }
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
