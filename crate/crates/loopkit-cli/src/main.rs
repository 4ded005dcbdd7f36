//! `loopkit`: batch front end. Every subcommand writes one CSV (or JSON)
//! table to stdout, or to `--out` together with a manifest.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::*;
use output::{emit, CliResult, Format, Report};

#[derive(Debug, Parser)]
#[command(name = "loopkit", version, about = "Loop-model combinatorics, parent Hamiltonians and Potts checks")]
struct Cli {
    /// Write the table here and a `<out>.manifest.json` beside it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = loopkit::selftest::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
enum Command {
    /// Count allowed matchings on open patches.
    Count(CountArgs),
    /// List boundary matchings or loop patterns.
    Enumerate(EnumerateArgs),
    /// Build the canonical loop pattern of a matching.
    Canonical(CanonicalArgs),
    /// Connectivity of the surgery-move graphs.
    Ergodicity(DimsArgs),
    /// Kernel dimension of a parent Hamiltonian.
    Groundspace(GroundspaceArgs),
    /// Schmidt ranks of the torus state, or the boundary-entropy table.
    Entropy(EntropyArgs),
    /// String-inserted torus states and their winding-sector overlaps.
    Strings(StringsArgs),
    /// Potts model on the net lattice.
    Potts(PottsArgs),
    /// Run every acceptance criterion and print a pass/fail table.
    Selftest(SelftestArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Count(_) => "count",
            Command::Enumerate(_) => "enumerate",
            Command::Canonical(_) => "canonical",
            Command::Ergodicity(_) => "ergodicity",
            Command::Groundspace(_) => "groundspace",
            Command::Entropy(_) => "entropy",
            Command::Strings(_) => "strings",
            Command::Potts(_) => "potts",
            Command::Selftest(_) => "selftest",
        }
    }

    fn run(&self, seed: u64) -> CliResult<Report> {
        match self {
            Command::Count(a) => count(a),
            Command::Enumerate(a) => enumerate(a),
            Command::Canonical(a) => canonical(a),
            Command::Ergodicity(a) => ergodicity(a),
            Command::Groundspace(a) => groundspace(a),
            Command::Entropy(a) => entropy(a),
            Command::Strings(a) => strings(a),
            Command::Potts(a) => potts(a, seed),
            Command::Selftest(a) => selftest(a, seed),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.command.run(cli.seed).and_then(|report| {
        let params = serde_json::json!({ "format": cli.format, "args": &cli.command });
        emit(&report, cli.format, cli.out.as_deref(), cli.command.name(), params, cli.seed)?;
        Ok(report.failure)
    });
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(msg)) => {
            eprintln!("loopkit {}: check failed: {}", cli.command.name(), msg);
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("loopkit {}: {}", cli.command.name(), e);
            e.exit_code()
        }
    }
}
