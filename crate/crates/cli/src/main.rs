//! `zhbt`: segmentation, scoring, round-trip runs and rank statistics for
//! Chinese back-translation.
//!
//! Exit codes: 0 on success (warnings allowed), 1 when a run's failed-record
//! share exceeds its `max_error_fraction`, 2 on usage, config or input errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "zhbt", version, about = "Chinese back-translation evaluation toolkit")]
struct Cli {
    /// Log verbosity on standard error: -v info, -vv debug.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Word,
    Char,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split Chinese text into words or characters.
    Segment {
        /// Text to segment; reads --file or standard input when absent.
        text: Option<String>,
        /// Segment each line of this file.
        #[arg(long, conflicts_with = "text")]
        file: Option<PathBuf>,
        /// Frequency lexicon (`word freq [tag]` per line); required at word level.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "word")]
        level: LevelArg,
        /// One token per line instead of slash-joined.
        #[arg(long)]
        lines: bool,
    },
    /// Score a back-translation file against its original.
    Score {
        original: PathBuf,
        candidate: PathBuf,
        /// TOML or JSON file with a `[scoring]` table (and optionally `lexicon`).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, value_enum)]
        level: Option<LevelArg>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run every backend over the corpus and write records, scores and the report.
    Run {
        /// Run config (TOML or JSON) or a previous run's manifest.json.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the verbatim threshold.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Friedman and Dunn tests over one or more scores.csv files.
    Stats {
        #[arg(required = true)]
        scores: Vec<PathBuf>,
        /// Writes friedman.csv, pairwise_tests.csv and significant_pairs.csv here;
        /// prints to standard output otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run config or TOML/JSON with an `[analysis]` table.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Rebuild the full report bundle from a run directory's scores.csv.
    Report {
        run_dir: PathBuf,
        /// Defaults to the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check a corpus file, and optionally a run config.
    Validate {
        corpus: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Traditional-character share above which a sample is reported.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
