//! `toxseq`: train, evaluate, and run BiLSTM molecular property models
//! from the command line.
//!
//! Exit codes are stable: 0 success, 2 configuration error, 3 data error,
//! 4 training divergence, 5 gradient-check tolerance failure. Success
//! paths print to standard output only.

mod cmd;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cmd::CliError;

#[derive(Parser)]
#[command(name = "toxseq", version, about = "BiLSTM molecular property prediction from SMILES")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write every run artifact to a directory
    Train(cmd::train::TrainArgs),
    /// Evaluate a saved model on a dataset
    Evaluate(cmd::evaluate::EvaluateArgs),
    /// Predict properties for SMILES strings
    Predict(cmd::predict::PredictArgs),
    /// Compare analytic gradients against finite differences
    Gradcheck(cmd::gradcheck::GradcheckArgs),
    /// Merge evaluation reports into one long-format CSV
    ExportMetrics(cmd::export::ExportMetricsArgs),
    /// Build a character vocabulary from a dataset
    Vocab(cmd::vocab::VocabArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(args) => cmd::train::run(args),
        Command::Evaluate(args) => cmd::evaluate::run(args),
        Command::Predict(args) => cmd::predict::run(args),
        Command::Gradcheck(args) => cmd::gradcheck::run(args),
        Command::ExportMetrics(args) => cmd::export::run(args),
        Command::Vocab(args) => cmd::vocab::run(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
