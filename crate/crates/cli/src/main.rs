//! `ce`: explain, compare and bucketize classifier outcomes from the shell.

mod commands;
mod explain;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ce_core::error::Error;
use ce_core::explanation::ScoreKind;

#[derive(Parser)]
#[command(name = "ce", version, about = "Feature-attribution scores for binary classifiers over tabular data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score the features of selected entities.
    Explain(explain::ExplainArgs),
    /// Compare two explanation runs over the same entities.
    Compare(commands::CompareArgs),
    /// Bucketize a dataset and write the bucket mapping.
    Bucketize(commands::BucketizeArgs),
    /// Run the seeded oracle and property checks.
    Selftest(commands::SelftestArgs),
    /// Top-1 distributions under equi-depth bucketizations of varying size.
    Sensitivity(commands::SensitivityArgs),
}

/// Dataset and classifier shared by the commands that score entities.
#[derive(Args, Clone)]
pub struct ModelArgs {
    /// CSV dataset with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Subscale model JSON.
    #[arg(long, group = "classifier", required_unless_present = "oracle_cmd")]
    pub model: Option<PathBuf>,
    /// External classifier executable (CSV probes on stdin, one label per line on stdout).
    #[arg(long, group = "classifier")]
    pub oracle_cmd: Option<String>,
    /// Argument passed to the oracle executable; may be repeated.
    #[arg(long, requires = "oracle_cmd", allow_hyphen_values = true)]
    pub oracle_arg: Vec<String>,
    /// Drop rows in which every value is the missing marker -9.
    #[arg(long)]
    pub drop_all_missing: bool,
}

/// One explanation failure class per exit status.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Oracle(String),
    Timeout(String),
    Checks(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Oracle(_) => Failure::Oracle(e.to_string()),
            Error::OracleTimeout(_) => Failure::Timeout(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Checks(_) => 1,
            Failure::Config(_) => 2,
            Failure::Oracle(_) => 3,
            Failure::Timeout(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Oracle(m) | Failure::Timeout(m) | Failure::Checks(m) => m,
        }
    }
}

pub fn parse_kind(s: &str) -> Result<ScoreKind, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Explain(args) => explain::run(args),
        Command::Compare(args) => commands::compare(args),
        Command::Bucketize(args) => commands::bucketize(args),
        Command::Selftest(args) => commands::selftest(args),
        Command::Sensitivity(args) => commands::sensitivity(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
