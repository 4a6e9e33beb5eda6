//! `cefr-onto`: features → tree → interval definitions → Manchester ontology,
//! plus classification and evaluation against any of those artifacts.
//!
//! Exit codes: 0 success, 2 input error, 3 completed but degenerate
//! (the tree never split).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::PipelineArgs;

#[derive(Parser)]
#[command(name = "cefr-onto", version, about = "Interval definitions of CEFR levels from a constrained decision tree")]
struct Cli {
    /// JSON file with pipeline settings; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[command(subcommand)]
    command: Command,
}

/// Which artifact to classify with; exactly one is required.
#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct ModelArgs {
    /// definitions.json written by `ontology`
    #[arg(long)]
    pub defs: Option<PathBuf>,
    /// tree.json written by `train`
    #[arg(long)]
    pub tree: Option<PathBuf>,
    /// .omn document written by `ontology`
    #[arg(long)]
    pub ontology: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the descriptor matrix to <out>/features.csv
    Features,
    /// Fit on the training split and evaluate on the validation split
    Train,
    /// Compile a tree into definitions and a Manchester-syntax ontology
    Ontology {
        /// Tree file (default: <out>/tree.json)
        #[arg(long)]
        tree: Option<PathBuf>,
    },
    /// Label texts, one per line, writing JSONL
    Classify {
        #[command(flatten)]
        model: ModelArgs,
        /// Text file, or `-` for stdin
        #[arg(long, default_value = "-")]
        input: PathBuf,
        /// JSONL destination (default: stdout)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score a model on a labeled corpus
    Evaluate {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Write the synthetic graded corpus
    #[command(hide = true)]
    GenFixture {
        #[arg(long, default_value_t = cefr_onto::fixture::DEFAULT_PER_LEVEL)]
        per_level: usize,
        /// Destination corpus file (default: <out>/fixture.csv)
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

pub enum Status {
    Done,
    Degenerate,
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let pipeline = match &cli.config {
        Some(path) => cli.pipeline.over(PipelineArgs::from_file(path)?),
        None => cli.pipeline,
    };
    let cfg = pipeline.resolve()?;
    match cli.command {
        Command::Features => commands::features(&cfg),
        Command::Train => commands::train(&cfg),
        Command::Ontology { tree } => commands::ontology(&cfg, tree),
        Command::Classify { model, input, output } => commands::classify(&model, &input, output.as_deref()),
        Command::Evaluate { model } => commands::evaluate(&cfg, &model),
        Command::GenFixture { per_level, output } => commands::gen_fixture(&cfg, per_level, output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::Degenerate) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
