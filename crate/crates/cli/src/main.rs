//! `lpx`: generate, train, explain, evaluate, and report on link-prediction
//! explainability experiments, driven by one TOML configuration.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use lpx_cli::config::RunConfig;
use lpx_cli::pipeline;

#[derive(Parser)]
#[command(name = "lpx", version, about = "Link-prediction explainability pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or import a dataset and freeze its train/test split
    Generate(RunArgs),
    /// Train the configured model on the train split
    Train(RunArgs),
    /// Attribute held-out edges with the configured explainers
    Explain(RunArgs),
    /// Score stored attributions with the configured protocol
    Evaluate(RunArgs),
    /// Render the summary table and SVG plots from stored results
    Report(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration file (TOML)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the configured global seed
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Output directory for all artifacts (overrides the config)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn load(self) -> Result<RunConfig> {
        RunConfig::load(&self.config)?.resolve(self.seed, self.out)
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(args) => pipeline::cmd_generate(&args.load()?),
        Command::Train(args) => pipeline::cmd_train(&args.load()?),
        Command::Explain(args) => pipeline::cmd_explain(&args.load()?),
        Command::Evaluate(args) => pipeline::cmd_evaluate(&args.load()?),
        Command::Report(args) => pipeline::cmd_report(&args.load()?),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
