use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use restrack::experiment::{
    read_csv_file, run_experiment, summarize_rows, write_csv_file, ExperimentSpec,
};
use restrack::suite::{run_suite, Suite};
use restrack::{Error, Result};

/// Attack-resilient multi-robot trajectory selection experiments.
#[derive(Parser)]
#[command(name = "restrack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment spec and write its records as CSV.
    Run {
        /// TOML experiment spec.
        #[arg(long)]
        spec: PathBuf,
        /// Output CSV; defaults to the spec's `output` field.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the spec's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print per-cell statistics and planner comparisons for a CSV.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run a built-in verification suite.
    Check {
        #[arg(long)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            spec,
            out,
            seed,
            jobs,
        } => {
            let text = std::fs::read_to_string(&spec).map_err(|e| {
                Error::Configuration(format!("cannot read {}: {e}", spec.display()))
            })?;
            let mut spec = ExperimentSpec::from_toml(&text)?;
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let out = out.or_else(|| spec.output.clone()).ok_or_else(|| {
                Error::Argument("no output path: pass --out or set `output` in the spec".into())
            })?;
            let rows = run_experiment(&spec, jobs)?;
            write_csv_file(&out, &rows)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
            print!("{}", summarize_rows(&rows));
            Ok(true)
        }
        Command::Summarize { input } => {
            let rows = read_csv_file(&input)?;
            print!("{}", summarize_rows(&rows));
            Ok(true)
        }
        Command::Check { suite, seed } => {
            let lines = run_suite(suite, seed)?;
            for l in &lines {
                println!("{l}");
            }
            Ok(lines.iter().all(|l| l.passed))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
