use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use listmatch::DistributionKind;
use serde::{Deserialize, Serialize};

const SEED_ENV: &str = "LISTMATCH_SEED";

/// Random Serial Dictatorship with short preference lists: simulation,
/// exact oracles, continuum limit and claim verification.
#[derive(Parser, Debug)]
#[command(name = "listmatch", version)]
pub struct Cli {
    /// Worker threads. Changes speed only, never output bytes.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Monte Carlo match probabilities per student and list length.
    Simulate(SimulateArgs),
    /// Solve the continuum market on a fixed grid.
    Ode(OdeArgs),
    /// Run claim verification suites and write reports.
    Verify(VerifyArgs),
    /// Regenerate figure data and SVG plots.
    Figures(FiguresArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

fn parse_dist(s: &str) -> Result<DistributionKind, String> {
    match s.parse::<DistributionKind>() {
        Ok(DistributionKind::Custom) => Err("custom weights cannot be given as a flag".into()),
        Ok(kind) => Ok(kind),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Number of schools.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// List lengths, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub d: Vec<usize>,
    /// Seats per school.
    #[arg(long, default_value_t = 1)]
    pub q: usize,
    /// School popularity: uniform, pareto-low, pareto-high, two-class,
    /// degenerate (or p1..p5).
    #[arg(long, value_parser = parse_dist, default_value = "uniform")]
    pub dist: DistributionKind,
    /// Replications.
    #[arg(long, default_value_t = 100_000)]
    pub reps: u64,
    /// Student indices: comma-separated items `i` or `a..b[:step]`, where a
    /// range includes `b` when the step lands on it. Defaults to `1..n`.
    #[arg(long, value_name = "LIST")]
    pub i: Option<String>,
    /// Rank threshold for the `rank_cdf_k` column.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Master seed.
    #[arg(long, env = SEED_ENV, default_value_t = 42)]
    pub seed: u64,
    /// Output CSV; the manifest goes next to it.
    #[arg(long, default_value = "simulate.csv")]
    pub out: PathBuf,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OdeMethod {
    Direct,
    Tau,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct OdeArgs {
    /// List length (any real >= 1).
    #[arg(long, default_value_t = 2.0)]
    pub d: f64,
    /// Seats per school.
    #[arg(long, default_value_t = 1)]
    pub q: usize,
    /// End of the time grid.
    #[arg(long, default_value_t = 3.0)]
    pub t_max: f64,
    /// Integration step, at most 1e-3.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Integrate in t directly, or in the rescaled clock and map back.
    #[arg(long, value_enum, default_value_t = OdeMethod::Direct)]
    pub method: OdeMethod,
    /// Output CSV; the manifest goes next to it.
    #[arg(long, default_value = "ode.csv")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Comma-separated suites, or `all`.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Number of schools for the discrete suites.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Replications for simulation-backed suites (default per suite).
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long, env = SEED_ENV, default_value_t = 42)]
    pub seed: u64,
    /// Popularity law for main-discrete; uniform uses the exact oracle.
    #[arg(long, value_parser = parse_dist, default_value = "uniform")]
    pub dist: DistributionKind,
    /// Largest seat count for the conjecture scan.
    #[arg(long, default_value_t = 20)]
    pub q_max: usize,
    /// Largest list length (default per suite).
    #[arg(long)]
    pub d_max: Option<usize>,
    /// Directory for reports, CSV artifacts and the manifest.
    #[arg(long, default_value = "verify-out")]
    pub out_dir: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct FiguresArgs {
    /// d1-vs-d2, overlay, nonuniform or all.
    #[arg(long, default_value = "all")]
    pub fig: String,
    /// Number of schools.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// List length for the overlay figure.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Replications (default 100 paths for overlay, 10000 for nonuniform).
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long, env = SEED_ENV, default_value_t = 42)]
    pub seed: u64,
    /// Directory for CSV, SVG and the manifest.
    #[arg(long, default_value = "figures")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write outputs into this directory instead of the recorded paths.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
