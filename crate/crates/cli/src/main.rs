use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod analyze;
mod chat;
mod config;
mod explain;
mod render;
mod serve;
mod train;

/// Failure of a command, mapped to the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Empty or degenerate input: exit 1.
    Degenerate(String),
    /// Bad flags or unreadable inputs: exit 2.
    Invocation(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Invocation(e.into())
    }
}

pub type Outcome = Result<(), Failure>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Chat with a Titanic survival model that explains its predictions.
#[derive(Parser)]
#[command(name = "explainbot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
pub struct ModelArgs {
    /// Model file written by `train` (default: the bundled model).
    #[arg(long, env = "EXPLAINBOT_MODEL")]
    pub model: Option<PathBuf>,
    /// Intent catalog file (default: bundled).
    #[arg(long, env = "EXPLAINBOT_CATALOG")]
    pub catalog: Option<PathBuf>,
    /// Entity lexicon file (default: bundled).
    #[arg(long, env = "EXPLAINBOT_LEXICON")]
    pub lexicon: Option<PathBuf>,
    /// Passenger CSV used for backgrounds and data questions (default: bundled).
    #[arg(long, env = "EXPLAINBOT_DATA")]
    pub data: Option<PathBuf>,
}

impl ModelArgs {
    pub fn load_options(&self) -> explainbot_service::LoadOptions {
        explainbot_service::LoadOptions {
            model: self.model.clone(),
            catalog: self.catalog.clone(),
            lexicon: self.lexicon.clone(),
            data: self.data.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train the random forest and print its held-out metrics.
    Train(train::Args),
    /// Serve POST /chat and GET /health.
    Serve(serve::Args),
    /// Summarize a dialogue log: lengths, query types and intent flow.
    Analyze(analyze::Args),
    /// Chat in the terminal, one message per line.
    Chat(chat::Args),
    /// Explain the prediction for one passenger.
    Explain(explain::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Train(a) => train::run(a),
        Command::Serve(a) => serve::run(a),
        Command::Analyze(a) => analyze::run(a),
        Command::Chat(a) => chat::run(a),
        Command::Explain(a) => explain::run(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Degenerate(msg)) => {
            eprintln!("explainbot: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invocation(e)) => {
            eprintln!("explainbot: {e:#}");
            ExitCode::from(2)
        }
    }
}
