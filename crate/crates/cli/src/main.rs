//! `dvic`: generate or load data, unmix, cluster, evaluate and sweep.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dvic_core::Error;

/// Exit codes.
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NUMERIC: u8 = 4;
const EXIT_OTHER: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "dvic", version, about = "Diffusion and volume-maximization clustering")]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, env = "DVIC_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset with ground truth.
    Synth(SynthArgs),
    /// Cluster a dataset.
    Cluster(ClusterArgs),
    /// Estimate endmembers, abundances and purity.
    Unmix(UnmixArgs),
    /// Score predicted labels against ground truth.
    Eval(EvalArgs),
    /// Sweep hyperparameters and report median accuracy per node.
    Gridsearch(GridArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SynthKind {
    Triangle,
    Moons,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: SynthKind,
    /// Points (moons only).
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Gaussian noise standard deviation (moons only).
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Where the pixels come from.
#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// CSV file, ENVI header (`.hdr`) or dataset spec (`.toml`).
    #[arg(long)]
    input: PathBuf,
    /// Label raster header for ENVI input.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Z-score every band (CSV and ENVI input; specs carry their own flag).
    #[arg(long)]
    standardize: bool,
    /// Comma-separated band indices to drop (CSV and ENVI input).
    #[arg(long, value_delimiter = ',')]
    band_drop: Vec<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum AlgorithmArg {
    Lund,
    Dvic,
    Kmeans,
    Spectral,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    /// Nearest neighbors in the graph and the density estimate.
    #[arg(short = 'N', long = "n-neighbors", default_value_t = 20)]
    n_neighbors: usize,
    /// Kernel density scale.
    #[arg(long, default_value_t = 1.0)]
    sigma0: f64,
    /// Diffusion time.
    #[arg(short = 't', long, default_value_t = 0.0)]
    t: f64,
    /// Number of clusters.
    #[arg(short = 'K', long = "k")]
    k: usize,
    /// Eigenvectors kept for diffusion distances.
    #[arg(long, default_value_t = dvic_core::spectral::DEFAULT_ELL)]
    ell: usize,
    /// Random restarts (AVMAX for D-VIC, k-means otherwise).
    #[arg(long, default_value_t = dvic_core::unmixing::DEFAULT_REPLICATES)]
    replicates: usize,
    /// Fixed endmember count for D-VIC (estimated when absent).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct UnmixArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Fixed endmember count (estimated when absent).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = dvic_core::unmixing::DEFAULT_REPLICATES)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Predicted labels (single column, or a CSV with a `label` column).
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth labels, 0 = unlabeled.
    #[arg(long)]
    truth: PathBuf,
    /// Also write the report as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    /// Grid spec (TOML or JSON); overrides the grid flags below.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(short = 'K', long = "k")]
    k: Option<usize>,
    #[arg(long, default_value_t = 10)]
    n_min: usize,
    #[arg(long, default_value_t = 900)]
    n_max: usize,
    #[arg(long, default_value_t = 10)]
    n_count: usize,
    #[arg(long, default_value_t = 20)]
    sigma_count: usize,
    /// Fixed diffusion times (default: 0, 1, 2, ..., 2^T per neighbor count).
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = dvic_core::spectral::DEFAULT_ELL)]
    ell: usize,
    #[arg(long, default_value_t = dvic_core::unmixing::DEFAULT_REPLICATES)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Parameter(_) => EXIT_CONFIG,
                Error::Input(_) | Error::Format { .. } | Error::Io { .. } => EXIT_IO,
                Error::Convergence { .. } | Error::Degenerate(_) | Error::Disconnected { .. } => EXIT_NUMERIC,
            };
        }
        if cause.downcast_ref::<commands::ConfigError>().is_some() {
            return EXIT_CONFIG;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    EXIT_OTHER
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Cluster(a) => commands::cluster(a),
        Command::Unmix(a) => commands::unmix(a),
        Command::Eval(a) => commands::eval(a),
        Command::Gridsearch(a) => commands::gridsearch(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
