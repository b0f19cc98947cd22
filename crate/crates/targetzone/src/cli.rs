//! Command-line definitions. Every flag is optional here so that a config file can
//! supply it; defaults are applied when the merged set is resolved.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use targetzone_core::fit::Weighting;
use targetzone_core::BoundaryPolicy;

use crate::commands::{
    self, BacktestParams, DiffusionProfileParams, EstimateParams, FamilyKind, FitParams, IngestParams, Job,
    KrugmanCurveParams, LrtestParams, ModelKind, MomentScalingParams, ReproduceParams, SimulateParams,
};
use crate::config::{merge, Config};
use crate::ensemble::with_threads;
use crate::error::{CliError, Result};
use crate::io::{resolve, TimeFormat};
use crate::manifest::MANIFEST_FILE;
use crate::ticks::{Layout, TickTime};

#[derive(Debug, Parser)]
#[command(name = "targetzone", version, about = "Simulate, estimate and test target-zone diffusions")]
pub struct Cli {
    /// TOML file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for path-parallel work.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory against which relative input paths are resolved.
    #[arg(long, global = true, env = "TARGETZONE_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a model and write one `t,s` CSV per path.
    Simulate(SimulateArgs),
    /// Coarse-grain a tick file into window medians.
    Ingest(IngestArgs),
    /// Binned drift and volatility estimates.
    Estimate(EstimateArgs),
    /// Fit `f = alpha`, `g = beta sqrt(s - barrier)` to an estimate.
    Fit(FitArgs),
    /// Likelihood-ratio test of the volatility exponent.
    Lrtest(LrtestArgs),
    /// Krugman exchange-rate curve `s(v)`.
    KrugmanCurve(KrugmanCurveArgs),
    /// Near-wall diffusion coefficient `D/D0`.
    DiffusionProfile(DiffusionProfileArgs),
    /// Threshold mean-reversion strategy on a series.
    Backtest(BacktestArgs),
    /// Stationary moments of the physical potential across equilibrium gaps.
    MomentScaling(MomentScalingArgs),
    /// Fixture pipeline: simulate, estimate, fit, scan, test.
    Reproduce(ReproduceArgs),
    /// Re-run a manifest and verify its outputs.
    Replay(ReplayArgs),
}

fn parse_boundary(s: &str) -> std::result::Result<BoundaryPolicy, String> {
    match s {
        "reflect" => Ok(BoundaryPolicy::Reflect),
        "clamp" => Ok(BoundaryPolicy::Clamp),
        _ => Err(format!("`{s}` is not one of reflect, clamp")),
    }
}

fn parse_weighting(s: &str) -> std::result::Result<Weighting, String> {
    match s {
        "unweighted" => Ok(Weighting::Unweighted),
        "count_weighted" => Ok(Weighting::CountWeighted),
        _ => Err(format!("`{s}` is not one of unweighted, count_weighted")),
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Process to integrate [default: krugman_local].
    #[arg(long)]
    pub model: Option<ModelKind>,
    /// GBM drift per hour [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    pub drift: Option<f64>,
    /// Volatility for gbm and physical_potential [default: 7.8e-4].
    #[arg(long)]
    pub vol: Option<f64>,
    /// Repulsion constant C of the physical potential [default: 4.370908e-6].
    #[arg(long)]
    pub c: Option<f64>,
    /// Restoring force F of the physical potential [default: 1.03e-2].
    #[arg(long)]
    pub f: Option<f64>,
    /// Drift of the local Krugman model [default: beta^2/4].
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Volatility scale of krugman_local and hindered_diffusion [default: 5.42e-3].
    #[arg(long)]
    pub beta: Option<f64>,
    /// Lower barrier in log units [default: ln 1.2].
    #[arg(long, allow_negative_numbers = true)]
    pub barrier: Option<f64>,
    /// Euler steps per path [default: 100000].
    #[arg(long)]
    pub steps: Option<usize>,
    /// Number of independent paths [default: 1].
    #[arg(long)]
    pub paths: Option<usize>,
    /// Master seed; path i uses stream i [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Starting value [default: the barrier, or the equilibrium for physical_potential].
    #[arg(long, allow_negative_numbers = true)]
    pub initial_s: Option<f64>,
    /// Integration step in hours [default: 1/360].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Keep every n-th step [default: 1].
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Barrier handling: reflect or clamp [default: reflect].
    #[arg(long, value_parser = parse_boundary)]
    pub boundary: Option<BoundaryPolicy>,
    /// Time column of the written CSVs [default: hours].
    #[arg(long)]
    pub time_format: Option<TimeFormat>,
    /// Output directory (required).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    /// Tick CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Window length in seconds [default: 10].
    #[arg(long)]
    pub window: Option<f64>,
    /// Longest run of empty windows bridged when `--observed` is given [default: 5].
    #[arg(long)]
    pub max_gap: Option<usize>,
    /// Price columns [default: auto].
    #[arg(long)]
    pub layout: Option<Layout>,
    /// Timestamp format [default: auto].
    #[arg(long)]
    pub time: Option<TickTime>,
    /// Output directory (required).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    /// Series CSVs or directories; repeat or separate with commas.
    #[arg(long = "input", value_delimiter = ',')]
    pub inputs: Option<Vec<PathBuf>>,
    /// Number of bins [default: 100].
    #[arg(long)]
    pub bins: Option<usize>,
    /// Bins with fewer increments are not reported [default: 10].
    #[arg(long)]
    pub min_count: Option<usize>,
    /// Use every n-th sample [default: 1].
    #[arg(long)]
    pub subsample: Option<usize>,
    /// `lo,hi` replacing the data range.
    #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    pub range: Option<Vec<f64>>,
    /// `observed.csv` from `ingest`; increments touching long outages are skipped.
    #[arg(long)]
    pub observed: Option<PathBuf>,
    /// Longest run of empty windows bridged when `--observed` is given [default: 5].
    #[arg(long)]
    pub max_gap: Option<usize>,
    /// Output directory (required).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// `km.csv` from `estimate`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Lower barrier in log units [default: ln 1.2].
    #[arg(long, allow_negative_numbers = true)]
    pub barrier: Option<f64>,
    /// Volatility fit weights: unweighted or count_weighted [default: unweighted].
    #[arg(long, value_parser = parse_weighting)]
    pub weighting: Option<Weighting>,
    /// Sampling step of the estimate in hours [default: 1/360].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Output directory (required).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LrtestArgs {
    /// Series CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Lower barrier in log units [default: ln 1.2].
    #[arg(long, allow_negative_numbers = true)]
    pub barrier: Option<f64>,
    /// Lower end of the exponent search [default: 0.05].
    #[arg(long, allow_negative_numbers = true)]
    pub mu_lo: Option<f64>,
    /// Upper end of the exponent search [default: 3].
    #[arg(long)]
    pub mu_hi: Option<f64>,
    /// Exponent under the null [default: 0.5].
    #[arg(long)]
    pub mu_null: Option<f64>,
    /// Skip increments starting closer than this to the barrier [default: 1e-5].
    #[arg(long)]
    pub min_gap: Option<f64>,
    /// Smallest gap used in the likelihood [default: 1e-8].
    #[arg(long)]
    pub gap_floor: Option<f64>,
    /// Grid points before refinement [default: 60].
    #[arg(long)]
    pub grid: Option<usize>,
    /// Exponent tolerance [default: 1e-6].
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// `observed.csv` from `ingest`; increments touching long outages are skipped.
    #[arg(long)]
    pub observed: Option<PathBuf>,
    /// Longest run of empty windows bridged when `--observed` is given [default: 5].
    #[arg(long)]
    pub max_gap: Option<usize>,
    /// Output directory (required).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KrugmanCurveArgs {
    /// Money supply term [default: 0.2].
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<f64>,
    /// Semi-elasticity of money demand [default: 2].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Fundamental volatility [default: 1].
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Lower barrier in log units [default: ln 1.2].
    #[arg(long, allow_negative_numbers = true)]
    pub barrier: Option<f64>,
    /// First velocity value [default: the lower pasting point].
    #[arg(long, allow_negative_numbers = true)]
    pub v_from: Option<f64>,
    /// Last velocity value [default: six decay lengths above the start].
    #[arg(long, allow_negative_numbers = true)]
    pub v_to: Option<f64>,
    /// Curve points [default: 201].
    #[arg(long)]
    pub points: Option<usize>,
    /// Output directory (required).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiffusionProfileArgs {
    /// Particle radius in metres [default: 1e-6].
    #[arg(long)]
    pub radius: Option<f64>,
    /// Temperature in kelvin [default: 298.15].
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Viscosity in Pa s [default: 8.9e-4].
    #[arg(long)]
    pub viscosity: Option<f64>,
    /// Smallest gap in radii [default: 1e-3].
    #[arg(long)]
    pub from: Option<f64>,
    /// Largest gap in radii [default: 1e3].
    #[arg(long)]
    pub to: Option<f64>,
    /// Log-spaced points [default: 121].
    #[arg(long)]
    pub points: Option<usize>,
    /// Output directory (required).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BacktestArgs {
    /// Series CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Threshold in log units (required).
    #[arg(long, allow_negative_numbers = true)]
    pub s_eq: Option<f64>,
    /// Cost per position change in pips [default: 1.5].
    #[arg(long)]
    pub cost_pips: Option<f64>,
    /// Units held when in the market [default: 1].
    #[arg(long)]
    pub position_size: Option<f64>,
    /// Trade on every n-th sample [default: 1].
    #[arg(long)]
    pub sample_every: Option<usize>,
    /// Output directory (required).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MomentScalingArgs {
    /// Which potential constant is held fixed [default: fixed_repulsion].
    #[arg(long)]
    pub family: Option<FamilyKind>,
    /// Value of the fixed constant [default: 1].
    #[arg(long)]
    pub constant: Option<f64>,
    /// Noise amplitude [default: 1].
    #[arg(long)]
    pub vol: Option<f64>,
    /// Equilibrium gaps, comma separated [default: 1e-3 to 1e-2 in quarter decades].
    #[arg(long, value_delimiter = ',')]
    pub gaps: Option<Vec<f64>>,
    /// Barrier [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    pub barrier: Option<f64>,
    /// Euler steps per relaxation time [default: 50].
    #[arg(long)]
    pub steps_per_relaxation: Option<f64>,
    /// Recorded relaxation times per gap [default: 1e5].
    #[arg(long)]
    pub relaxations: Option<f64>,
    /// Discarded relaxation times [default: 10].
    #[arg(long)]
    pub burn_in: Option<f64>,
    /// Paths per gap [default: 1].
    #[arg(long)]
    pub paths: Option<usize>,
    /// Master seed [default: 3].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (required).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReproduceArgs {
    /// Master seed [default: 20110906].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Volatility scale [default: 5.42e-3].
    #[arg(long)]
    pub beta: Option<f64>,
    /// Ensemble paths [default: 400].
    #[arg(long)]
    pub paths: Option<usize>,
    /// Steps per path [default: 2500].
    #[arg(long)]
    pub steps: Option<usize>,
    /// Bins for the main estimate [default: 100].
    #[arg(long)]
    pub bins: Option<usize>,
    /// Bin counts for the robustness scan [default: 20,60,100,140].
    #[arg(long, value_delimiter = ',')]
    pub scan_bins: Option<Vec<usize>>,
    /// Length of the test path [default: 200000].
    #[arg(long)]
    pub lr_steps: Option<usize>,
    /// Output directory (required).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// A `manifest.json` or the directory holding one.
    pub manifest: PathBuf,
    /// Where to write the re-run; defaults to the manifest's directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn launch<J: Job>(args: &impl Serialize, config: &Config, data_dir: Option<&Path>) -> Result<String> {
    let (mut job, out): (J, _) = merge(config.section(J::NAME), args)?;
    job.resolve_paths(data_dir);
    let out = out.ok_or_else(|| CliError::Usage(format!("{}: --out is required", J::NAME)))?;
    let (manifest, summary) = commands::execute(&job, &out)?;
    Ok(format!(
        "{summary}\nwrote {} file(s) and {MANIFEST_FILE} to {}",
        manifest.outputs.len(),
        out.display()
    ))
}

fn dispatch(command: &Command, config: &Config, data_dir: Option<&Path>) -> Result<String> {
    match command {
        Command::Simulate(a) => launch::<SimulateParams>(a, config, data_dir),
        Command::Ingest(a) => launch::<IngestParams>(a, config, data_dir),
        Command::Estimate(a) => launch::<EstimateParams>(a, config, data_dir),
        Command::Fit(a) => launch::<FitParams>(a, config, data_dir),
        Command::Lrtest(a) => launch::<LrtestParams>(a, config, data_dir),
        Command::KrugmanCurve(a) => launch::<KrugmanCurveParams>(a, config, data_dir),
        Command::DiffusionProfile(a) => launch::<DiffusionProfileParams>(a, config, data_dir),
        Command::Backtest(a) => launch::<BacktestParams>(a, config, data_dir),
        Command::MomentScaling(a) => launch::<MomentScalingParams>(a, config, data_dir),
        Command::Reproduce(a) => launch::<ReproduceParams>(a, config, data_dir),
        Command::Replay(a) => {
            let path = resolve(data_dir, &a.manifest);
            let path = if path.is_dir() { path.join(MANIFEST_FILE) } else { path };
            let out = match &a.out {
                Some(o) => o.clone(),
                None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
            };
            commands::replay(&path, &out)
        }
    }
}

/// Runs a parsed command line and returns the text to print.
pub fn run(cli: &Cli) -> Result<String> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let data_dir = cli.data_dir.clone().or_else(|| config.data_dir());
    let threads = cli.threads.or_else(|| config.threads());
    with_threads(threads, || dispatch(&cli.command, &config, data_dir.as_deref())).map_err(CliError::Usage)?
}
