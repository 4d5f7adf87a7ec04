//! Batch front end for the `seco-core` library.
//!
//! Every subcommand resolves its parameters (flag, then `--config` file, then
//! built-in default), runs inside a worker pool of `--threads` threads and writes
//! its outputs plus a `manifest.json` into `--out`.

mod commands;
pub mod config;
pub mod manifest;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

pub use commands::{
    cmd_ari, cmd_cluster, cmd_seco, cmd_select_tau, cmd_silhouette, cmd_simulate, cmd_validate,
};
use config::{ConfigFile, Resolver};
use manifest::{InputFile, Manifest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// 2 for usage errors, 3 for input/output errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<seco_core::Error> for CliError {
    fn from(e: seco_core::Error) -> Self {
        use seco_core::Error as E;
        match e {
            E::Io { .. } | E::Parse { .. } | E::InvalidCell { .. } => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "seco",
    version,
    about = "Extremal dependence estimation and clustering of groups of variables"
)]
pub struct Cli {
    /// Plain-text `key = value` file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (0: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Random seed; a fixed default is used and recorded when omitted.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory [default: seco-out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a dataset from a model spec (one spec, or a JSON array of independent blocks).
    Simulate(SimulateArgs),
    /// Normalised SECO matrix of a dataset.
    Seco(SecoArgs),
    /// Partition the groups from a SECO matrix.
    Cluster(ClusterArgs),
    /// Choose the CAICE threshold by minimising the partition SECO over a grid.
    SelectTau(SelectTauArgs),
    /// Choose the number of clusters of a baseline method by average silhouette.
    Silhouette(SilhouetteArgs),
    /// Adjusted Rand Index of two partitions.
    Ari(AriArgs),
    /// Run a validation suite; exits with 1 when a check fails.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Number of rows.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset CSV with one header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Group layout JSON, e.g. [[0,1],[2,3]].
    #[arg(long)]
    pub layout: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SecoArgs {
    #[command(flatten)]
    pub input: DataArgs,
    /// Number of extremes. Common presets: 100, 30 (loss curves), 50 (high dimension).
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// SECO similarity matrix (headerless CSV).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// caice, hclust or kmedoids.
    #[arg(long)]
    pub method: Option<String>,
    /// Threshold for caice.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Number of clusters for hclust and kmedoids.
    #[arg(long = "K")]
    pub n_clusters: Option<usize>,
    /// average, single or complete.
    #[arg(long)]
    pub linkage: Option<String>,
}

#[derive(Debug, Args)]
pub struct SelectTauArgs {
    #[command(flatten)]
    pub input: DataArgs,
    /// SECO similarity matrix; computed from the data with --k when absent.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Threshold grid start:step:end [default: 0.05:0.0025:0.12].
    #[arg(long)]
    pub grid: Option<String>,
    /// Number of extremes for the loss [default: 30].
    #[arg(long = "k-loss")]
    pub k_loss: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SilhouetteArgs {
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Range of K as a:b or a:step:b [default: 2:10].
    #[arg(long = "k-range")]
    pub k_range: Option<String>,
    /// hclust or kmedoids [default: hclust].
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub linkage: Option<String>,
}

#[derive(Debug, Args)]
pub struct AriArgs {
    #[arg(long)]
    pub p1: Option<PathBuf>,
    #[arg(long)]
    pub p2: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(subcommand)]
    pub suite: Suite,
}

#[derive(Debug, Subcommand)]
pub enum Suite {
    /// Estimators on independent uniforms with d = ⌈n^exponent⌉ columns.
    Bounds(BoundsArgs),
    /// Exact invariance and bound checks on a dataset.
    Axioms(AxiomsArgs),
    /// Monotonicity of the closed-form SECO in the mother parameter.
    Coherence(CoherenceArgs),
    /// ARI of two partitions.
    Ari(AriArgs),
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Sample sizes a:step:b or a comma list [default: 100:50:1000].
    #[arg(long = "n-grid")]
    pub n_grid: Option<String>,
    /// [default: 1.25]
    #[arg(long)]
    pub exponent: Option<f64>,
    /// [default: 50]
    #[arg(long)]
    pub k: Option<usize>,
    /// Block length [default: 50].
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AxiomsArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CoherenceArgs {
    /// logistic or hr [default: logistic].
    #[arg(long)]
    pub family: Option<String>,
    /// Mother parameter grid start:step:end.
    #[arg(long = "mother-grid")]
    pub mother_grid: Option<String>,
    /// Child parameter grid start:step:end.
    #[arg(long = "child-grid")]
    pub child_grid: Option<String>,
    /// Keep every N-th child parameter [default: 1].
    #[arg(long)]
    pub thin: Option<usize>,
}

/// State of one invocation: resolved parameters, files read and written.
pub struct Run {
    pub command: String,
    pub out: PathBuf,
    pub seed: u64,
    pub threads: usize,
    pub params: Resolver,
    inputs: Vec<InputFile>,
    outputs: Vec<String>,
    results: BTreeMap<String, Value>,
}

impl Run {
    /// Records an input file (size and SHA-256) and returns its path.
    pub fn input(&mut self, path: PathBuf) -> Result<PathBuf, CliError> {
        self.inputs.push(InputFile::hash(&path)?);
        Ok(path)
    }

    /// Path of an output file inside the output directory.
    pub fn output(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.out.join(name)
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(
            key.to_string(),
            serde_json::to_value(value).expect("value serializes"),
        );
    }

    fn manifest(self) -> Manifest {
        Manifest {
            tool: "seco",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            seed: self.seed,
            threads: self.threads,
            parameters: self.params.resolved,
            inputs: self.inputs,
            outputs: self.outputs,
            results: self.results,
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate(_) => "simulate",
        Command::Seco(_) => "seco",
        Command::Cluster(_) => "cluster",
        Command::SelectTau(_) => "select-tau",
        Command::Silhouette(_) => "silhouette",
        Command::Ari(_) => "ari",
        Command::Validate(v) => match v.suite {
            Suite::Bounds(_) => "validate bounds",
            Suite::Axioms(_) => "validate axioms",
            Suite::Coherence(_) => "validate coherence",
            Suite::Ari(_) => "validate ari",
        },
    }
}

/// Runs one invocation. `Ok(false)` means a validation check failed; the
/// manifest and report files are written either way.
pub fn run(cli: Cli) -> Result<bool, CliError> {
    let config = match &cli.config {
        Some(path) => ConfigFile::read(path)?,
        None => ConfigFile::default(),
    };
    let mut params = Resolver::new(config);
    let threads = params.or("threads", cli.threads, 0usize)?;
    let seed = params.or("seed", cli.seed, seco_core::DEFAULT_SEED)?;
    let out = params.or("out", cli.out, PathBuf::from("seco-out"))?;
    create_dir(&out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    let mut run = Run {
        command: command_name(&cli.command).to_string(),
        out,
        seed,
        threads: pool.current_num_threads(),
        params,
        inputs: Vec::new(),
        outputs: Vec::new(),
        results: BTreeMap::new(),
    };
    let outcome = pool.install(|| match &cli.command {
        Command::Simulate(a) => cmd_simulate(&mut run, a),
        Command::Seco(a) => cmd_seco(&mut run, a),
        Command::Cluster(a) => cmd_cluster(&mut run, a),
        Command::SelectTau(a) => cmd_select_tau(&mut run, a),
        Command::Silhouette(a) => cmd_silhouette(&mut run, a),
        Command::Ari(a) => cmd_ari(&mut run, a),
        Command::Validate(a) => cmd_validate(&mut run, &a.suite),
    })?;
    let dir = run.out.clone();
    run.manifest().write(&dir)?;
    Ok(outcome)
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
