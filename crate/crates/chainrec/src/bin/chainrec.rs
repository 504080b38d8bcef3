//! Scenario-driven front end. Exit codes: 0 all checks passed, 1 a
//! mathematical check failed, 2 configuration or I/O error.

use chainrec::error::{Error, Result};
use chainrec::report::{write_csv_sibling, write_json};
use chainrec::runner::{
    run_certify, run_classify, run_oracle, run_verify_constructions, OracleQuery, RunOutcome,
};
use chainrec::scenario::Scenario;
use chainrec::tree::VertexId;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "chainrec", version, about = "δ-chains and chain-recurrence certificates for weighted shifts on trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file.
    #[arg(long)]
    scenario: PathBuf,
    /// Write the JSON report here (with a CSV sibling for tabular results);
    /// default is stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the scenario scalar mode.
    #[arg(long, value_parser = ["exact", "float"])]
    mode: Option<String>,
    /// Worker threads for sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Replay the chain construction recipes over the configured δ grid.
    VerifyConstructions(Common),
    /// Certify branch vectors non-recurrent; cross-check oracle and search.
    Certify(Common),
    /// Classify a classical weighted shift via the series criterion.
    Classify(Common),
    /// Ad-hoc minimal-δ reachability query against the influence oracle.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Target coordinate, e.g. "0" or "(-3,1)".
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        /// Coordinate value to reach at the target.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        value: String,
        /// Start from this basis vector instead of 0.
        #[arg(long, allow_hyphen_values = true)]
        source: Option<String>,
        /// Largest chain length m to tabulate.
        #[arg(long, default_value_t = 40)]
        horizon: u32,
    },
}

fn load(common: &Common) -> Result<Scenario> {
    let mut scenario = Scenario::load(&common.scenario)?;
    if let Some(seed) = common.seed {
        scenario.seed = seed;
    }
    if let Some(mode) = &common.mode {
        scenario.mode = mode.clone();
        scenario.mode()?;
    }
    Ok(scenario)
}

fn emit(common: &Common, outcome: &RunOutcome, table: &str) -> Result<()> {
    write_json(common.out.as_deref(), &outcome.report)?;
    if let Some(out) = &common.out {
        write_csv_sibling(out, &outcome.report, table)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::VerifyConstructions(common) => {
            let outcome = run_verify_constructions(&load(&common)?)?;
            emit(&common, &outcome, "chains")?;
            Ok(outcome.ok)
        }
        Command::Certify(common) => {
            let outcome = run_certify(&load(&common)?, common.jobs.max(1))?;
            emit(&common, &outcome, "certificates")?;
            Ok(outcome.ok)
        }
        Command::Classify(common) => {
            let outcome = run_classify(&load(&common)?)?;
            emit(&common, &outcome, "checks")?;
            Ok(outcome.ok)
        }
        Command::Oracle { common, target, value, source, horizon } => {
            let query = OracleQuery {
                target: VertexId::parse(&target)?,
                value,
                source: source.as_deref().map(VertexId::parse).transpose()?,
                horizon,
            };
            let outcome = run_oracle(&load(&common)?, &query)?;
            emit(&common, &outcome, "table")?;
            Ok(outcome.ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Scenario(_)
                | Error::Io(_)
                | Error::InvalidWindow(_)
                | Error::WeightOutOfRange(_)
                | Error::InvalidNormSpec(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
