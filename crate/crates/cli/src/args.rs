use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "chaosgen",
    version,
    about = "Random variates from chaotic maps, with ergodic and statistical checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a target law through the invariant-measure transform
    Generate(GenerateArgs),
    /// Run Frobenius-Perron, Birkhoff, density, push-forward, sensitivity
    /// or transitivity checks
    Verify(VerifyArgs),
    /// Hénon attractor point cloud, density grid and box-counting dimension
    Henon(HenonArgs),
    /// Geometric Brownian motion paths driven by chaotic normals
    Gbm(GbmArgs),
    /// Statistical battery on a column of a CSV file
    Test(TestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapId {
    Logistic,
    Gauss,
    Tent,
    Chebyshev,
    Henon,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MapArgs {
    #[arg(long, value_enum, default_value = "logistic")]
    pub map: MapId,
    /// Logistic parameter
    #[arg(long, default_value_t = 4.0)]
    pub lambda: f64,
    /// Chebyshev degree
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Hénon parameter a
    #[arg(long, default_value_t = 1.4)]
    pub a: f64,
    /// Hénon parameter b
    #[arg(long, default_value_t = 0.3)]
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawId {
    Uniform,
    Exponential,
    Normal,
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, value_enum)]
    pub law: LawId,
    /// Exponential rate
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    /// Normal mean
    #[arg(long, default_value_t = 0.0)]
    pub mean: f64,
    /// Normal standard deviation
    #[arg(long, default_value_t = 1.0)]
    pub sd: f64,
    /// Bernoulli success probability
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Uniform lower bound
    #[arg(long, default_value_t = 0.0)]
    pub low: f64,
    /// Uniform upper bound
    #[arg(long, default_value_t = 1.0)]
    pub high: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = chaosgen::randgen::DEFAULT_BURN_IN)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Independent coordinates per sample
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Fp,
    Birkhoff,
    Density,
    Pushforward,
    Sensitivity,
    Transitivity,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Checks to run, comma separated
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub suite: Vec<Suite>,
    /// Orbit length for Birkhoff, density and transitivity checks
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub burn_in: usize,
    /// Bins for density and push-forward (default 200) or transitivity
    /// (default 100)
    #[arg(long)]
    pub bins: Option<usize>,
    /// Interior grid points for the Frobenius-Perron residual
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub fp_tol: f64,
    /// Birkhoff indicator interval; defaults to the lower half of the domain
    #[arg(long)]
    pub lo: Option<f64>,
    #[arg(long)]
    pub hi: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub birkhoff_tol: f64,
    /// L1 bound for density and push-forward checks
    #[arg(long, default_value_t = 0.05)]
    pub l1_tol: f64,
    #[arg(long, default_value_t = 50)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub epsilon: f64,
    /// Divergence horizon; 60 for interval maps, 100 for Hénon
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Seeds 0..count averaged by the sensitivity check
    #[arg(long, default_value_t = 100)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0.02)]
    pub exponent_tol: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct HenonArgs {
    #[arg(long, default_value_t = 1.4)]
    pub a: f64,
    #[arg(long, default_value_t = 0.3)]
    pub b: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = chaosgen::attractor::DEFAULT_BURN_IN)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    /// Fit the box-counting dimension
    #[arg(long)]
    pub dimension: bool,
    #[arg(long, default_value_t = 2)]
    pub k_min: u32,
    #[arg(long, default_value_t = 10)]
    pub k_max: u32,
    /// Cells per axis of the density grid; no grid when absent
    #[arg(long)]
    pub grid: Option<usize>,
    /// Skip writing the point cloud
    #[arg(long)]
    pub no_cloud: bool,
    /// Point cloud CSV
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Density grid CSV
    #[arg(long)]
    pub grid_output: Option<PathBuf>,
    /// Summary JSON
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GbmArgs {
    #[arg(long, default_value_t = 100.0)]
    pub s0: f64,
    #[arg(long, default_value_t = 0.05)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    /// Horizon T
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 252)]
    pub steps: usize,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep only terminal values; no path file
    #[arg(long)]
    pub summary_only: bool,
    /// Paths CSV
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Summary JSON
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestId {
    Ks,
    Chi2,
    Acf,
    Jb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    Uniform,
    Normal,
}

#[derive(Debug, Args, Serialize)]
pub struct TestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Column name or zero-based index
    #[arg(long, default_value = "0")]
    pub column: String,
    /// Tests to run, comma separated; defaults to ks,chi2,acf for a uniform
    /// reference and ks,acf,jb for a normal one
    #[arg(long, value_enum, value_delimiter = ',')]
    pub tests: Option<Vec<TestId>>,
    /// Reference law for KS
    #[arg(long, value_enum, default_value = "uniform")]
    pub reference: Reference,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    #[arg(long, default_value_t = 1)]
    pub lag: usize,
    #[arg(long)]
    pub ks_max: Option<f64>,
    /// Judge the autocorrelation against this bound instead of reporting it
    #[arg(long)]
    pub acf_max: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}
