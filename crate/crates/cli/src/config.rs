use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use wwls::DEFAULT_MODULUS;

#[derive(Debug, Parser, Serialize)]
#[command(name = "wwls", version, about = "Wasserstein Weisfeiler-Lehman subtree distances between labeled graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads; defaults to every available core.
    #[arg(long, global = true, env = "WWLS_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Pairwise WWLS distance matrix.
    Distance(MatrixArgs),
    /// Pairwise WWLS kernel matrix exp(-gamma * d).
    Kernel(KernelArgs),
    /// Distinct WL subtree types per height under canonical ids and hashing.
    HashStats(HashStatsArgs),
    /// Distance curves between graphs and their edge-perturbed copies.
    Noise(NoiseArgs),
    /// Leave-one-out nearest-neighbor accuracy on the distance matrix.
    Knn(KnnArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Distance(_) => "distance",
            Command::Kernel(_) => "kernel",
            Command::HashStats(_) => "hash-stats",
            Command::Noise(_) => "noise",
            Command::Knn(_) => "knn",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    Random,
    Cycle,
    Grid,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("source").required(true).args(["dataset", "gen"])))]
pub struct InputArgs {
    /// Directory holding the NAME_*.txt files of a TU-format dataset.
    #[arg(long, requires = "name")]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub name: Option<String>,
    /// Generate a synthetic dataset instead of reading one.
    #[arg(long, value_enum)]
    pub gen: Option<GenKind>,
    /// Nodes per generated graph.
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Edge probability of generated random graphs.
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    /// Number of generated graphs.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Replace node labels by node degrees.
    #[arg(long)]
    pub degree_labels: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct HashArgs {
    /// WL iterations.
    #[arg(long, default_value_t = 2)]
    pub h: usize,
    /// Independent hash slots.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Prime modulus of the polynomial hash.
    #[arg(long, default_value_t = DEFAULT_MODULUS)]
    pub modulus: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Exact,
    Sinkhorn,
}

#[derive(Debug, Args, Serialize)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverKind::Exact)]
    pub solver: SolverKind,
    /// Entropic regularization of the Sinkhorn solver.
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    /// Output file; a `<out>.meta.json` sidecar is written next to it.
    /// Without it results go to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub hash: HashArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[arg(long)]
    pub gamma: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct KnnArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[arg(long, default_value_t = 1)]
    pub k_neighbors: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct HashStatsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Largest WL height to audit.
    #[arg(long, default_value_t = 7)]
    pub h_max: usize,
    #[arg(long, default_value_t = DEFAULT_MODULUS)]
    pub modulus: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct NoiseArgs {
    #[arg(long, value_enum, default_value_t = GenKind::Random)]
    pub kind: GenKind,
    #[arg(long, value_enum, default_value_t = NoiseModeArg::Rewire)]
    pub mode: NoiseModeArg,
    #[arg(long, default_value_t = 30)]
    pub max_noise: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    #[command(flatten)]
    pub hash: HashArgs,
    /// Run every WL height 1..=h and prefix each row with its height.
    #[arg(long)]
    pub sweep_h: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModeArg {
    Rewire,
    Add,
}
