//! `domconv`: batch runner for the envelope, dominated-convergence and
//! convexification experiments.
//!
//! Exit codes: 0 when every checked assertion holds, 1 when a mathematical
//! assertion is violated, 2 for configuration or input errors.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use domconv::CorpusId;

use commands::Failure;
use config::{Flags, RunConfig};

#[derive(Parser)]
#[command(name = "domconv", version, about = "Envelope functionals, dominated convergence and convexification on sampled grids")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice identity and defect inequality on random instances
    LatticeCheck,
    /// Tail-envelope report for a nonnegative sequence (CSV or JSON)
    Arzela,
    /// Convexification steps with dual certificates
    Convexify,
    /// Uniform-convergence certificate for a decreasing sequence
    Dini,
    /// Envelope value and witness for one function
    Envelope {
        /// Corpus term index
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Inductive construction trace for a decreasing sequence
    Lemma2,
    /// Inspect the built-in sequence families
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    /// List entries with bounds and flags
    List,
    /// Emit term n of an entry as JSON
    Emit {
        #[arg(value_parser = parse_corpus)]
        id: CorpusId,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
}

fn parse_corpus(s: &str) -> Result<CorpusId, String> {
    s.parse().map_err(|e: domconv::Error| e.to_string())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(&cli.flags).map_err(Failure::Usage)?;
    if let Some(threads) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::LatticeCheck => commands::lattice_check(&cfg),
        Command::Arzela => commands::arzela(&cfg),
        Command::Convexify => commands::convexify(&cfg),
        Command::Dini => commands::dini(&cfg),
        Command::Envelope { n } => commands::envelope_cmd(&cfg, n),
        Command::Lemma2 => commands::lemma2(&cfg),
        Command::Corpus { action } => match action {
            CorpusAction::List => commands::corpus_list(&cfg),
            CorpusAction::Emit { id, n } => commands::corpus_emit(&cfg, id, n),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
