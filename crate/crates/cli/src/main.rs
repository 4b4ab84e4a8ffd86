//! `orgeval`: stage-by-stage command line over a working directory.

mod commands;
mod config;
mod manifest;

use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::{MissingArtifact, MissingInput};
use config::Overrides;

#[derive(Parser)]
#[command(name = "orgeval", version, about = "Supervised vs unsupervised university performance, and the gap between them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write a seeded synthetic world (inputs plus ground truth) to --out.
    Synth,
    /// Filter and normalize publications into corpus.jsonl.
    Ingest,
    /// Cluster author mentions into clusters.jsonl.
    Disambiguate,
    /// Attribute clusters to universities: staff.csv and review_queue.csv.
    DeriveStaff,
    /// Score researchers and universities in both modes.
    Score,
    /// Rank, compare and correlate the two modes: report.json and tables.
    Compare,
    /// Print and save a text summary of report.json.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Ingest => "ingest",
            Command::Disambiguate => "disambiguate",
            Command::DeriveStaff => "derive-staff",
            Command::Score => "score",
            Command::Compare => "compare",
            Command::Report => "report",
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.overrides.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let r = config::resolve(&cli.overrides)?;
    match cli.command {
        Command::Synth => commands::synth(&r),
        Command::Ingest => commands::ingest(&r),
        Command::Disambiguate => commands::disambiguate_step(&r),
        Command::DeriveStaff => commands::derive_staff_step(&r),
        Command::Score => commands::score(&r),
        Command::Compare => commands::compare(&r),
        Command::Report => commands::report(&r),
    }
}

fn code(e: &anyhow::Error) -> &'static str {
    if e.downcast_ref::<MissingArtifact>().is_some() {
        return "missing_artifact";
    }
    if e.downcast_ref::<MissingInput>().is_some() {
        return "missing_input";
    }
    match e.downcast_ref::<orgeval::Error>() {
        Some(orgeval::Error::Io { .. }) => "io",
        Some(orgeval::Error::Parse { .. } | orgeval::Error::Csv(_) | orgeval::Error::Json(_)) => "parse",
        Some(_) => "invalid",
        None if e.downcast_ref::<std::io::Error>().is_some() => "io",
        None => "error",
    }
}

/// `error step=<name> code=<code> [requires=<step>] message="..."` on one line.
fn error_line(step: &str, e: &anyhow::Error) -> String {
    let message = format!("{e:#}").replace(['\n', '\r'], " ").replace('"', "'");
    let requires = e
        .downcast_ref::<MissingArtifact>()
        .map(|m| format!(" requires={}", m.step))
        .unwrap_or_default();
    format!("error step={step} code={}{requires} message=\"{message}\"", code(e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(cli.command.name(), &e));
            ExitCode::FAILURE
        }
    }
}
