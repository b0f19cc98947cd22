//! Resolved parameter sets of every subcommand and the code that runs them.
//!
//! A parameter struct is what the manifest stores: replaying a manifest deserializes
//! it and runs the same code.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use targetzone_core::backtest::{run_strategy, StrategyConfig};
use targetzone_core::coarse::{coarse_grain, gap_mask};
use targetzone_core::fit::{fit_krugman, lr_test_increments, Increments, LrConfig, Weighting};
use targetzone_core::hindered::ParticleEnv;
use targetzone_core::km::{estimate_masked, estimate_pooled, robustness_scan, BinConfig};
use targetzone_core::krugman::{KrugmanParams, LocalExpansion};
use targetzone_core::simulate::{simulate_path, PotentialFamily, ScalingConfig};
use targetzone_core::{eurchf_floor, BoundaryPolicy, Model, ProcessSpec, SimConfig, TimeSeries, TEN_SECOND_TAU};

use crate::ensemble;
use crate::error::{CliError, Result};
use crate::io::{self, format_iso, resolve, ProfileRow, TimeFormat};
use crate::manifest::{OutputDir, RunManifest, MANIFEST_FILE, TOOL, VERSION};
use crate::ticks::{load_ticks, Layout, TickFormat, TickTime};

/// One subcommand with fully resolved parameters.
pub trait Job: Serialize + DeserializeOwned {
    const NAME: &'static str;

    fn seed(&self) -> Option<u64> {
        None
    }

    fn inputs(&self) -> Vec<PathBuf> {
        Vec::new()
    }

    fn resolve_paths(&mut self, _data_dir: Option<&Path>) {}

    /// Writes the outputs and returns a one-line summary.
    fn run(&self, out: &mut OutputDir) -> Result<String>;
}

/// Runs `job` into `out` and writes its manifest next to the outputs.
pub fn execute<J: Job>(job: &J, out: &Path) -> Result<(RunManifest, String)> {
    let mut dir = OutputDir::create(out)?;
    dir.protect(&job.inputs());
    let summary = job.run(&mut dir)?;
    let manifest = RunManifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: J::NAME.into(),
        seed: job.seed(),
        params: serde_json::to_value(job)?,
        inputs: job.inputs(),
        outputs: dir.digests()?,
    };
    io::write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok((manifest, summary))
}

fn execute_value<J: Job>(params: serde_json::Value, out: &Path) -> Result<RunManifest> {
    let job: J = serde_json::from_value(params).map_err(|e| CliError::Data(format!("manifest parameters: {e}")))?;
    execute(&job, out).map(|(m, _)| m)
}

/// Re-runs a manifest into `out` and checks every output digest against it.
pub fn replay(manifest_path: &Path, out: &Path) -> Result<String> {
    let old = RunManifest::load(manifest_path)?;
    if old.tool != TOOL {
        return Err(CliError::Data(format!("{}: not a {TOOL} manifest", manifest_path.display())));
    }
    let params = old.params.clone();
    let new = match old.command.as_str() {
        SimulateParams::NAME => execute_value::<SimulateParams>(params, out)?,
        IngestParams::NAME => execute_value::<IngestParams>(params, out)?,
        EstimateParams::NAME => execute_value::<EstimateParams>(params, out)?,
        FitParams::NAME => execute_value::<FitParams>(params, out)?,
        LrtestParams::NAME => execute_value::<LrtestParams>(params, out)?,
        KrugmanCurveParams::NAME => execute_value::<KrugmanCurveParams>(params, out)?,
        DiffusionProfileParams::NAME => execute_value::<DiffusionProfileParams>(params, out)?,
        BacktestParams::NAME => execute_value::<BacktestParams>(params, out)?,
        MomentScalingParams::NAME => execute_value::<MomentScalingParams>(params, out)?,
        ReproduceParams::NAME => execute_value::<ReproduceParams>(params, out)?,
        other => return Err(CliError::Data(format!("unknown command `{other}` in manifest"))),
    };
    for (a, b) in old.outputs.iter().zip(&new.outputs) {
        if a != b {
            return Err(CliError::Data(format!("{} differs from the manifest", a.file)));
        }
    }
    if old.outputs.len() != new.outputs.len() {
        return Err(CliError::Data("the replay produced a different set of files".into()));
    }
    let note = if old.version == VERSION {
        String::new()
    } else {
        format!(" (recorded with version {})", old.version)
    };
    Ok(format!("replayed `{}`: {} outputs identical{note}", old.command, new.outputs.len()))
}

fn require_input(path: &Path) -> Result<()> {
    if path.as_os_str().is_empty() {
        return Err(CliError::Usage("--input is required".into()));
    }
    Ok(())
}

fn resolve_in_place(path: &mut PathBuf, data_dir: Option<&Path>) {
    *path = resolve(data_dir, path);
}

/// Expands directories to their `*.csv` files in name order.
fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| CliError::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return Err(CliError::Usage("no input series given".into()));
    }
    Ok(files)
}

/// An increment of a series thinned by `m` is usable when all `m` original ones are.
fn thin_mask(mask: &[bool], m: usize) -> Vec<bool> {
    mask.chunks(m).filter(|c| c.len() == m).map(|c| c.iter().all(|&u| u)).collect()
}

fn load_mask(path: &Path, series: &TimeSeries, max_gap: usize) -> Result<Vec<bool>> {
    let observed = io::read_observed(path)?;
    if observed.len() != series.len() {
        return Err(CliError::Data(format!(
            "{}: {} flags for a series of {} samples",
            path.display(),
            observed.len(),
            series.len()
        )));
    }
    Ok(gap_mask(&observed, max_gap))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModelKind {
    Gbm,
    PhysicalPotential,
    #[default]
    KrugmanLocal,
    HinderedDiffusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    pub model: ModelKind,
    /// GBM drift, 1/hour.
    pub drift: f64,
    /// GBM and physical-potential volatility, 1/√hour.
    pub vol: f64,
    pub c: f64,
    pub f: f64,
    /// Krugman drift; defaults to `beta² / 4`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub barrier: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    /// Defaults to the equilibrium for the physical potential and the barrier otherwise.
    pub initial_s: Option<f64>,
    pub tau: f64,
    pub record_every: usize,
    pub boundary: BoundaryPolicy,
    pub time_format: TimeFormat,
}

impl Default for SimulateParams {
    fn default() -> Self {
        Self {
            model: ModelKind::KrugmanLocal,
            drift: 0.0,
            vol: 7.8e-4,
            // one-hour relaxation towards an equilibrium 0.0206 above the floor
            c: 4.370908e-6,
            f: 1.03e-2,
            alpha: None,
            beta: 5.42e-3,
            barrier: eurchf_floor(),
            steps: 100_000,
            paths: 1,
            seed: 0,
            initial_s: None,
            tau: TEN_SECOND_TAU,
            record_every: 1,
            boundary: BoundaryPolicy::Reflect,
            time_format: TimeFormat::Hours,
        }
    }
}

impl SimulateParams {
    pub fn spec(&self) -> Result<ProcessSpec> {
        let b = self.barrier;
        let spec = match self.model {
            ModelKind::Gbm => ProcessSpec::gbm(self.drift, self.vol),
            ModelKind::PhysicalPotential => ProcessSpec::physical_potential(self.c, self.f, self.vol, b),
            ModelKind::KrugmanLocal => {
                ProcessSpec::krugman_local(self.alpha.unwrap_or(self.beta * self.beta / 4.0), self.beta, b)
            }
            ModelKind::HinderedDiffusion => ProcessSpec::hindered_diffusion(self.beta, b),
        }?;
        Ok(spec)
    }

    pub fn sim_config(&self, spec: &ProcessSpec) -> SimConfig {
        let initial_s = self
            .initial_s
            .unwrap_or_else(|| spec.equilibrium().unwrap_or(self.barrier));
        SimConfig {
            n_steps: self.steps,
            n_paths: self.paths,
            seed: self.seed,
            initial_s,
            tau: self.tau,
            record_every: self.record_every,
            boundary: self.boundary,
        }
    }
}

impl Job for SimulateParams {
    const NAME: &'static str = "simulate";

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }

    fn run(&self, out: &mut OutputDir) -> Result<String> {
        let spec = self.spec()?;
        let cfg = self.sim_config(&spec);
        cfg.validate(&spec)?;
        let files = (0..cfg.n_paths)
            .map(|p| out.file(&format!("path_{p:04}.csv")))
            .collect::<Result<Vec<_>>>()?;
        files.par_iter().enumerate().try_for_each(|(p, file)| {
            let path = simulate_path(&spec, &cfg, p)?;
            io::write_series(file, &path, self.time_format)
        })?;
        Ok(format!(
            "simulated {} path(s) of {} steps ({:?})",
            cfg.n_paths,
            cfg.n_steps,
            spec.model()
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestParams {
    pub input: PathBuf,
    /// Window length in seconds.
    pub window: f64,
    /// Longest tolerated run of empty windows.
    pub max_gap: usize,
    pub layout: Layout,
    pub time: TickTime,
}

impl Default for IngestParams {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            window: targetzone_core::coarse::DEFAULT_WINDOW_SECS,
            max_gap: targetzone_core::coarse::DEFAULT_MAX_GAP,
            layout: Layout::Auto,
            time: TickTime::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows: usize,
    pub ticks: usize,
    pub malformed: usize,
    pub malformed_samples: Vec<String>,
    pub window_secs: f64,
    pub slots: usize,
    pub empty_slots: usize,
    pub unusable_increments: usize,
    pub first_slot: String,
    pub last_slot: String,
}

impl Job for IngestParams {
    const NAME: &'static str = "ingest";

    fn inputs(&self) -> Vec<PathBuf> {
        vec![self.input.clone()]
    }

    fn resolve_paths(&mut self, data_dir: Option<&Path>) {
        resolve_in_place(&mut self.input, data_dir);
    }

    fn run(&self, out: &mut OutputDir) -> Result<String> {
        let format = TickFormat {
            layout: self.layout,
            time: self.time,
        };
        require_input(&self.input)?;
        let load = load_ticks(&self.input, &format)?;
        let coarse = coarse_grain(&load.ticks, self.window)?;
        let usable = coarse.usable_increments(self.max_gap);
        let series = &coarse.series;
        io::write_series(&out.file("series.csv")?, series, TimeFormat::Iso)?;
        io::write_observed(&out.file("observed.csv")?, series, &coarse.observed)?;
        let report = IngestReport {
            rows: load.rows,
            ticks: load.ticks.len(),
            malformed: load.malformed,
            malformed_samples: load.samples,
            window_secs: self.window,
            slots: series.len(),
            empty_slots: coarse.observed.iter().filter(|&&o| !o).count(),
            unusable_increments: usable.iter().filter(|&&u| !u).count(),
            first_slot: format_iso(series.timestamp_us(0))?,
            last_slot: format_iso(series.timestamp_us(series.len() - 1))?,
        };
        out.write_json("ingest.json", &report)?;
        Ok(format!(
            "{} ticks ({} malformed rows) -> {} slots, {} empty",
            report.ticks, report.malformed, report.slots, report.empty_slots
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateParams {
    /// Series files or directories of them; several series are pooled.
    pub inputs: Vec<PathBuf>,
    pub bins: usize,
    pub min_count: usize,
    pub subsample: usize,
    pub range: Option<[f64; 2]>,
    /// `observed.csv` from `ingest`; only with a single input.
    pub observed: Option<PathBuf>,
    pub max_gap: usize,
}

impl Default for EstimateParams {
    fn default() -> Self {
        let bins = BinConfig::default();
        Self {
            inputs: Vec::new(),
            bins: bins.n_bins,
            min_count: bins.min_count,
            subsample: 1,
            range: None,
            observed: None,
            max_gap: targetzone_core::coarse::DEFAULT_MAX_GAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub n_series: usize,
    pub n_samples: usize,
    pub n_increments: usize,
    /// Increments that fell into any bin.
    pub assigned: usize,
    pub reported_bins: usize,
    /// Increments in bins below `min_count`, which are not in the CSV.
    pub dropped: usize,
    pub tau: f64,
}

impl Job for EstimateParams {
    const NAME: &'static str = "estimate";

    fn inputs(&self) -> Vec<PathBuf> {
        self.inputs.iter().chain(&self.observed).cloned().collect()
    }

    fn resolve_paths(&mut self, data_dir: Option<&Path>) {
        for p in self.inputs.iter_mut().chain(self.observed.as_mut()) {
            resolve_in_place(p, data_dir);
        }
    }

    fn run(&self, out: &mut OutputDir) -> Result<String> {
        let files = expand_inputs(&self.inputs)?;
        out.protect(&files);
        let series = files
            .iter()
            .map(|f| io::read_series(f))
            .collect::<Result<Vec<_>>>()?;
        let thinned = series
            .iter()
            .map(|s| s.subsample(self.subsample))
            .collect::<targetzone_core::Result<Vec<_>>>()?;
        let cfg = BinConfig {
            n_bins: self.bins,
            range: self.range.map(|[lo, hi]| (lo, hi)),
            min_count: self.min_count,
        };
        let est = match &self.observed {
            Some(obs) => {
                if files.len() != 1 {
                    return Err(CliError::Usage("--observed needs exactly one input series".into()));
                }
                let mask = thin_mask(&load_mask(obs, &series[0], self.max_gap)?, self.subsample);
                estimate_masked(&thinned[0], &mask, &cfg)?
            }
            None => estimate_pooled(&thinned, &cfg)?,
        };
        io::write_km(&out.file("km.csv")?, &est)?;
        let n_samples: usize = thinned.iter().map(|s| s.len()).sum();
        let summary = EstimateSummary {
            n_series: thinned.len(),
            n_samples,
            n_increments: n_samples - thinned.len(),
            assigned: est.assigned,
            reported_bins: est.bins.len(),
            dropped: est.assigned - est.total_count(),
            tau: est.tau,
        };
        out.write_json("estimate.json", &summary)?;
        Ok(format!(
            "{} bins reported from {} increments ({} in sparse bins)",
            summary.reported_bins, summary.assigned, summary.dropped
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitParams {
    /// `km.csv` from `estimate`.
    pub input: PathBuf,
    pub barrier: f64,
    pub weighting: Weighting,
    /// Step of the estimated series, hours.
    pub tau: f64,
}

impl Default for FitParams {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            barrier: eurchf_floor(),
            weighting: Weighting::Unweighted,
            tau: TEN_SECOND_TAU,
        }
    }
}

impl Job for FitParams {
    const NAME: &'static str = "fit";

    fn inputs(&self) -> Vec<PathBuf> {
        vec![self.input.clone()]
    }

    fn resolve_paths(&mut self, data_dir: Option<&Path>) {
        resolve_in_place(&mut self.input, data_dir);
    }

    fn run(&self, out: &mut OutputDir) -> Result<String> {
        require_input(&self.input)?;
        let est = io::read_km(&self.input, self.tau)?;
        let report = fit_krugman(&est, self.barrier, self.weighting)?;
        out.write_json("fit.json", &report)?;
        let ratio = match (report.ratio, report.ratio_se) {
            (Some(r), Some(se)) => format!("{r:.4} ± {se:.4}"),
            _ => "undefined (alpha <= 0)".into(),
        };
        Ok(format!(
            "beta = {:.4e} ± {:.2e}, alpha = {:.4e} ± {:.2e}, sqrt(alpha)/beta = {ratio}",
            report.beta_hat, report.beta_se, report.alpha_hat, report.alpha_se
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LrtestParams {
    pub input: PathBuf,
    pub barrier: f64,
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub mu_null: f64,
    pub min_gap: f64,
    pub gap_floor: f64,
    pub grid: usize,
    pub tolerance: f64,
    pub observed: Option<PathBuf>,
    pub max_gap: usize,
}

impl Default for LrtestParams {
    fn default() -> Self {
        let lr = LrConfig::default();
        Self {
            input: PathBuf::new(),
            barrier: eurchf_floor(),
            mu_lo: lr.mu_bounds.0,
            mu_hi: lr.mu_bounds.1,
            mu_null: lr.mu_null,
            min_gap: lr.min_gap,
            gap_floor: lr.gap_floor,
            grid: lr.grid,
            tolerance: lr.tolerance,
            observed: None,
            max_gap: targetzone_core::coarse::DEFAULT_MAX_GAP,
        }
    }
}

impl Job for LrtestParams {
    const NAME: &'static str = "lrtest";

    fn inputs(&self) -> Vec<PathBuf> {
        std::iter::once(&self.input).chain(&self.observed).cloned().collect()
    }

    fn resolve_paths(&mut self, data_dir: Option<&Path>) {
        resolve_in_place(&mut self.input, data_dir);
        if let Some(p) = self.observed.as_mut() {
            resolve_in_place(p, data_dir);
        }
    }

    fn run(&self, out: &mut OutputDir) -> Result<String> {
        require_input(&self.input)?;
        let series = io::read_series(&self.input)?;
        let cfg = LrConfig {
            mu_bounds: (self.mu_lo, self.mu_hi),
            tolerance: self.tolerance,
            gap_floor: self.gap_floor,
            min_gap: self.min_gap,
            grid: self.grid,
            mu_null: self.mu_null,
        };
        let masks = match &self.observed {
            Some(p) => Some(vec![load_mask(p, &series, self.max_gap)?]),
            None => None,
        };
        let inc = Increments::from_series(std::slice::from_ref(&series), self.barrier, &cfg, masks.as_deref())?;
        let report = lr_test_increments(&inc, &cfg)?;
        out.write_json("lrtest.json", &report)?;
        Ok(format!(
            "mu_hat = {:.4}, LR = {:.3}, p = {:.3} ({} increments)",
            report.mu_hat, report.lr_statistic, report.p_value, report.n_increments
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrugmanCurveParams {
    pub m: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub barrier: f64,
    /// Defaults to the pasting point.
    pub v_from: Option<f64>,
    /// Defaults to six decay lengths `1/ρ` past `v_from`.
    pub v_to: Option<f64>,
    pub points: usize,
}

impl Default for KrugmanCurveParams {
    fn default() -> Self {
        Self {
            m: 0.2,
            gamma: 2.0,
            sigma: 1.0,
            barrier: eurchf_floor(),
            v_from: None,
            v_to: None,
            points: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrugmanSummary {
    pub params: KrugmanParams,
    pub local: LocalExpansion,
    pub ratio: f64,
    pub pasting_residuals: [f64; 2],
}

impl Job for KrugmanCurveParams {
    const NAME: &'static str = "krugman-curve";

    fn run(&self, out: &mut OutputDir) -> Result<String> {
        let p = KrugmanParams::solve(self.m, self.gamma, self.sigma, self.barrier)?;
        let v_from = self.v_from.unwrap_or(p.v_floor);
        let v_to = self.v_to.unwrap_or(v_from + 6.0 / p.rho);
        out.write_csv("curve.csv", p.curve(v_from, v_to, self.points)?)?;
        let local = p.local_expansion();
        let (r0, r1) = p.pasting_residuals();
        let summary = KrugmanSummary {
            params: p,
            local,
            ratio: local.ratio(),
            pasting_residuals: [r0, r1],
        };
        out.write_json("krugman.json", &summary)?;
        Ok(format!(
            "rho = {:.4}, v_floor = {:.6}, alpha = {:.4e}, beta = {:.4e}",
            p.rho, p.v_floor, local.alpha, local.beta
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffusionProfileParams {
    /// Particle radius, m.
    pub radius: f64,
    /// Kelvin.
    pub temperature: f64,
    /// Pa·s.
    pub viscosity: f64,
    /// Smallest and largest gap in units of the radius; points are log-spaced.
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Default for DiffusionProfileParams {
    fn default() -> Self {
        Self {
            radius: 1e-6,
            temperature: 298.15,
            viscosity: 8.9e-4,
            from: 1e-3,
            to: 1e3,
            points: 121,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSummary {
    /// m²/s.
    pub bulk_diffusion: f64,
    pub lambda_at_radius: f64,
}

impl Job for DiffusionProfileParams {
    const NAME: &'static str = "diffusion-profile";

    fn run(&self, out: &mut OutputDir) -> Result<String> {
        if !(self.from > 0.0 && self.to > self.from) || self.points < 2 {
            return Err(CliError::Usage("diffusion profile needs 0 < from < to and points >= 2".into()));
        }
        let env = ParticleEnv::at_temperature(self.temperature, self.viscosity, self.radius, 0.0)?;
        let d0 = env.bulk_diffusion();
        let ratio = (self.to / self.from).ln();
        let rows = (0..self.points)
            .map(|i| {
                let x = self.from * (ratio * i as f64 / (self.points - 1) as f64).exp();
                let s = x * self.radius;
                Ok(ProfileRow {
                    gap_over_radius: x,
                    d_over_d0: env.wall_diffusion(s)? / d0,
                    linear_d_over_d0: env.linear_wall_diffusion(s)? / d0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.write_csv("diffusion.csv", rows)?;
        let summary = DiffusionSummary {
            bulk_diffusion: d0,
            lambda_at_radius: env.lorentz_lambda(self.radius)?,
        };
        out.write_json("diffusion.json", &summary)?;
        Ok(format!("D0 = {d0:.4e} m^2/s over {} gaps", self.points))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestParams {
    pub input: PathBuf,
    /// Required: the strategy is short above and long below this level.
    pub s_eq: Option<f64>,
    pub cost_pips: f64,
    pub position_size: f64,
    /// Trade on every n-th sample.
    pub sample_every: usize,
}

impl Default for BacktestParams {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            s_eq: None,
            cost_pips: 1.5,
            position_size: 1.0,
            sample_every: 1,
        }
    }
}

impl Job for BacktestParams {
    const NAME: &'static str = "backtest";

    fn inputs(&self) -> Vec<PathBuf> {
        vec![self.input.clone()]
    }

    fn resolve_paths(&mut self, data_dir: Option<&Path>) {
        resolve_in_place(&mut self.input, data_dir);
    }

    fn run(&self, out: &mut OutputDir) -> Result<String> {
        require_input(&self.input)?;
        let s_eq = self.s_eq.ok_or_else(|| CliError::Usage("--s-eq is required".into()))?;
        let series = io::read_series(&self.input)?.subsample(self.sample_every)?;
        let strategy = StrategyConfig {
            s_eq,
            cost_pips: self.cost_pips,
            position_size: self.position_size,
        };
        let report = run_strategy(&series, &strategy)?;
        out.write_json("backtest.json", &report)?;
        out.write_csv("trades.csv", &report.trades)?;
        let sharpe = report.sharpe.map_or("undefined".into(), |s| format!("{s:.3}"));
        Ok(format!(
            "{} trades, net P&L {:.4e}, annualized Sharpe {sharpe}",
            report.n_trades, report.net_pnl
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Hold `C` fixed.
    #[default]
    FixedRepulsion,
    /// Hold `F` fixed.
    FixedPressure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentScalingParams {
    pub family: FamilyKind,
    /// The value of the constant that is held fixed.
    pub constant: f64,
    pub vol: f64,
    pub gaps: Vec<f64>,
    pub barrier: f64,
    pub steps_per_relaxation: f64,
    pub relaxations: f64,
    pub burn_in: f64,
    pub paths: usize,
    pub seed: u64,
}

impl Default for MomentScalingParams {
    fn default() -> Self {
        Self {
            family: FamilyKind::FixedRepulsion,
            constant: 1.0,
            vol: 1.0,
            gaps: (0..5).map(|i| 1e-3 * 10f64.powf(i as f64 / 4.0)).collect(),
            barrier: 0.0,
            steps_per_relaxation: 50.0,
            relaxations: 1e5,
            burn_in: 10.0,
            paths: 1,
            seed: 3,
        }
    }
}

impl MomentScalingParams {
    pub fn config(&self) -> ScalingConfig {
        let family = match self.family {
            FamilyKind::FixedRepulsion => PotentialFamily::FixedRepulsion { c: self.constant },
            FamilyKind::FixedPressure => PotentialFamily::FixedPressure { f: self.constant },
        };
        ScalingConfig {
            family,
            vol: self.vol,
            gaps: self.gaps.clone(),
            barrier: self.barrier,
            steps_per_relaxation: self.steps_per_relaxation,
            relaxations: self.relaxations,
            burn_in_relaxations: self.burn_in,
            n_paths: self.paths,
            seed: self.seed,
        }
    }
}

impl Job for MomentScalingParams {
    const NAME: &'static str = "moment-scaling";

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }

    fn run(&self, out: &mut OutputDir) -> Result<String> {
        let report = ensemble::moment_scaling(&self.config())?;
        out.write_csv("scaling.csv", &report.per_gap)?;
        out.write_json("scaling.json", &report)?;
        let fmt = |x: Option<f64>| x.map_or("n/a".into(), |v| format!("{v:.3}"));
        Ok(format!(
            "volatility exponent {}, skewness exponent {}",
            fmt(report.volatility_exponent),
            fmt(report.skewness_scale_exponent)
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReproduceParams {
    pub seed: u64,
    pub beta: f64,
    pub paths: usize,
    pub steps: usize,
    pub bins: usize,
    pub scan_bins: Vec<usize>,
    /// Length of the single path used for the exponent test.
    pub lr_steps: usize,
}

impl Default for ReproduceParams {
    fn default() -> Self {
        Self {
            seed: 20110906,
            beta: 5.42e-3,
            paths: 400,
            steps: 2500,
            bins: 100,
            scan_bins: vec![20, 60, 100, 140],
            lr_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceSummary {
    pub beta_true: f64,
    pub alpha_true: f64,
    pub beta_hat: f64,
    pub beta_se: f64,
    pub beta_relative_error: f64,
    pub beta_within_5pct: bool,
    pub ratio: Option<f64>,
    pub ratio_se: Option<f64>,
    pub scan_relative_spread: f64,
    pub mu_hat: f64,
    pub lr_p_value: f64,
}

impl Job for ReproduceParams {
    const NAME: &'static str = "reproduce";

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }

    fn run(&self, out: &mut OutputDir) -> Result<String> {
        let b = eurchf_floor();
        let alpha = self.beta * self.beta / 4.0;
        let spec = ProcessSpec::new(Model::KrugmanLocal { alpha, beta: self.beta }, Some(b))?;
        let cfg = SimConfig::new(self.steps, self.seed, b).with_paths(self.paths);
        let paths = ensemble::simulate_ensemble(&spec, &cfg)?;
        io::write_series(&out.file("fixture_path.csv")?, &paths[0], TimeFormat::Hours)?;

        let template = BinConfig::with_bins(self.bins);
        let est = estimate_pooled(&paths, &template)?;
        io::write_km(&out.file("km.csv")?, &est)?;
        let fit = fit_krugman(&est, b, Weighting::Unweighted)?;
        out.write_json("fit.json", &fit)?;
        let scan = robustness_scan(&paths, &self.scan_bins, &[1], b, &template, Weighting::Unweighted)?;
        out.write_json("scan.json", &scan)?;

        let lr_cfg = SimConfig::new(self.lr_steps, self.seed.wrapping_add(1), b);
        let lr_path = simulate_path(&spec, &lr_cfg, 0)?;
        let inc = Increments::from_series(&[lr_path], b, &LrConfig::default(), None)?;
        let lr = lr_test_increments(&inc, &LrConfig::default())?;
        out.write_json("lrtest.json", &lr)?;

        KrugmanCurveParams::default().run(out)?;
        DiffusionProfileParams::default().run(out)?;

        let rel = fit.beta_hat / self.beta - 1.0;
        let summary = ReproduceSummary {
            beta_true: self.beta,
            alpha_true: alpha,
            beta_hat: fit.beta_hat,
            beta_se: fit.beta_se,
            beta_relative_error: rel,
            beta_within_5pct: rel.abs() < 0.05,
            ratio: fit.ratio,
            ratio_se: fit.ratio_se,
            scan_relative_spread: scan.relative_spread,
            mu_hat: lr.mu_hat,
            lr_p_value: lr.p_value,
        };
        out.write_json("summary.json", &summary)?;
        Ok(format!(
            "beta {:.4e} vs {:.4e} ({:+.2}%), scan spread {:.2}%, mu_hat {:.3}, p = {:.3}",
            summary.beta_hat,
            self.beta,
            100.0 * rel,
            100.0 * scan.relative_spread,
            lr.mu_hat,
            lr.p_value
        ))
    }
}
