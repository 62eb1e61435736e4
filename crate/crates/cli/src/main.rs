//! `gsim`: generate synthetic graph datasets, run similarity queries on the
//! simulated accelerator, compare architecture configs and model batching.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "gsim", version, about = "Graph-similarity accelerator simulator")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Seed for every random choice (dataset, model, pairing).
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Architecture config file or preset name (baseline, pipelined, sparse).
    #[arg(long, global = true, default_value = "sparse")]
    pub config: String,
    /// Output directory.
    #[arg(long, global = true, default_value = "gsim-out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Also evaluate the reference model and report the difference.
    #[arg(long, global = true)]
    pub validate: bool,
    /// Write the reordered edge streams as CSV.
    #[arg(long, global = true)]
    pub dump_edge_stream: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic graph dataset and its index.
    GenData(GenData),
    /// Simulate one query.
    Run(Run),
    /// Simulate a dataset under several configs.
    Compare(Compare),
    /// Amortization of the launch overhead over batch sizes.
    Batch(Batch),
    /// Create or inspect model files.
    #[command(subcommand)]
    Model(ModelCmd),
}

#[derive(Debug, Args)]
pub struct GenData {
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = gsim_core::workload::STANDARD_NODE_MEAN)]
    pub node_mean: f64,
    #[arg(long, default_value_t = gsim_core::workload::STANDARD_EDGE_MEAN)]
    pub edge_mean: f64,
    #[arg(long, default_value_t = gsim_core::DEFAULT_VOCAB)]
    pub vocab: usize,
}

#[derive(Debug, Args)]
pub struct Run {
    /// First graph (JSON).
    pub g1: PathBuf,
    /// Second graph (JSON).
    pub g2: PathBuf,
    /// Model file; a random model from `--seed` when omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Dataset index written by `gen-data`; the standard synthetic workload
    /// when omitted. Consecutive graphs form the query pairs.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Compare {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Configs to compare (files or preset names); the first is the reference.
    #[arg(long, num_args = 1.., default_values = ["baseline", "pipelined", "sparse"])]
    pub configs: Vec<String>,
}

#[derive(Debug, Args)]
pub struct Batch {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 10, 100, 300, 1000])]
    pub sizes: Vec<usize>,
}

#[derive(Debug, Subcommand)]
pub enum ModelCmd {
    /// Write a random model with the default shape.
    New,
    /// Print shape and checksum of a model file.
    Inspect { path: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
