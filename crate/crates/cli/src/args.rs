use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Seeded matching of multiple graphs: simulation studies and data tools.
#[derive(Debug, Parser)]
#[command(name = "omnimatch", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Master seed; overrides the seed in the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism). Use 1 for bit-exact runs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for CSV tables and the JSON summary.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// JSON config document; unknown keys are rejected.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Leave the generation time out of the summary.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Matching accuracy on simulated or pre-aligned graphs, or matchings of real graphs.
    Match(DataArgs),
    /// Align many graphs and report pairwise Frobenius distances.
    Multimatch(MultimatchArgs),
    /// Power of the shuffled two-sample test.
    Power,
    /// Cluster aligned graphs and score against subject labels.
    Cluster(ClusterArgs),
    /// Build cosine-similarity graphs from row-per-item embedding files.
    IngestEmbeddings(IngestArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Input graph file (dense .csv or edge list); repeat for each graph.
    #[arg(long = "graph")]
    pub graphs: Vec<PathBuf>,
    /// Seed vertex list, one 0-based index per line.
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    /// Treat the input graphs as vertex-aligned and run a shuffle study.
    #[arg(long)]
    pub aligned: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MultimatchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Anchor graph index for anchor mode.
    #[arg(long)]
    pub anchor: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Subject labels, one token per line in graph order.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    /// Embedding file (rows of comma-separated reals); repeat per corpus.
    #[arg(long = "embeddings")]
    pub embeddings: Vec<PathBuf>,
    /// Zero out similarities below this value.
    #[arg(long)]
    pub threshold: Option<f64>,
}
