mod config;
mod experiments;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use geophase::acceptance;

use config::{Experiment, ExperimentConfig, Format, Overrides};
use report::Report;

/// Exit status for invalid configuration or arguments.
const USAGE: u8 = 2;
/// Exit status when a check misses its tolerance or a computation fails.
const FAILURE: u8 = 1;

#[derive(Parser)]
#[command(
    name = "geophase",
    version,
    about = "Geometric-phase experiments with machine-readable reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments described by one or more TOML config files.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Time steps and loop samples (overrides the file).
        #[arg(long)]
        steps: Option<usize>,
        /// Phase tolerance (overrides the file).
        #[arg(long)]
        tol: Option<f64>,
        /// Seed for the gauge sweep (overrides the file).
        #[arg(long)]
        seed: Option<u64>,
        /// Run independent experiments concurrently; output order is unchanged.
        #[arg(long)]
        parallel: bool,
    },
    /// List the available experiments.
    List {
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run the full acceptance suite.
    Check {
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            configs,
            output,
            format,
            steps,
            tol,
            seed,
            parallel,
        } => {
            let overrides = Overrides {
                steps,
                tolerance: tol,
                seed,
                format,
                output,
            };
            run(&configs, &overrides, parallel)
        }
        Command::List { format } => {
            print!("{}", list(format));
            ExitCode::SUCCESS
        }
        Command::Check { output, format } => check(output, format.unwrap_or_default()),
    }
}

fn run(paths: &[PathBuf], overrides: &Overrides, parallel: bool) -> ExitCode {
    let mut configs = Vec::new();
    for path in paths {
        match ExperimentConfig::load(path, overrides) {
            Ok(c) => configs.push(c),
            Err(e) => {
                eprintln!("usage error: {e}");
                return ExitCode::from(USAGE);
            }
        }
    }

    let outcomes: Vec<geophase::Result<Report>> = if parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = configs.iter().map(|c| s.spawn(|| experiments::run(c))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("experiment thread panicked"))
                .collect()
        })
    } else {
        configs.iter().map(experiments::run).collect()
    };

    let mut reports = Vec::new();
    for (outcome, path) in outcomes.into_iter().zip(paths) {
        match outcome {
            Ok(r) => reports.push(r),
            Err(e) => {
                eprintln!("{}: computation failed: {e}", path.display());
                return ExitCode::from(FAILURE);
            }
        }
    }

    // the first config decides where and how the combined report goes
    let format = configs[0].format;
    let text = match format {
        Format::Json => report::to_json(&reports),
        Format::Csv => report::to_csv(&reports),
    };
    if let Err(code) = emit(&text, configs[0].output.as_ref()) {
        return code;
    }

    let mut ok = true;
    for r in reports.iter().filter(|r| !r.converged) {
        eprint!("{}", report::deviation_table(r));
        ok = false;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(FAILURE)
    }
}

fn emit(text: &str, path: Option<&PathBuf>) -> Result<(), ExitCode> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| {
            eprintln!("cannot write {}: {e}", p.display());
            ExitCode::from(FAILURE)
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(serde::Serialize)]
struct CatalogEntry {
    name: &'static str,
    description: &'static str,
    formula: &'static str,
}

fn list(format: Format) -> String {
    let entries: Vec<CatalogEntry> = Experiment::ALL
        .iter()
        .map(|e| CatalogEntry {
            name: e.name(),
            description: e.description(),
            formula: e.formulas(),
        })
        .collect();
    match format {
        Format::Json => serde_json::to_string_pretty(&entries).expect("static catalog") + "\n",
        Format::Csv => report::records_to_csv(&entries),
    }
}

fn check(output: Option<PathBuf>, format: Format) -> ExitCode {
    let outcomes = acceptance::run_all();
    for o in &outcomes {
        eprintln!("{o}");
    }
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&outcomes).expect("outcomes serialize") + "\n",
        Format::Csv => report::records_to_csv(&outcomes),
    };
    if let Err(code) = emit(&text, output.as_ref()) {
        return code;
    }
    if outcomes.iter().all(|o| o.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(FAILURE)
    }
}
