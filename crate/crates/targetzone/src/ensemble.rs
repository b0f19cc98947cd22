//! Path-parallel wrappers around the core simulators.
//!
//! Each path draws from its own RNG stream, so results do not depend on the number of
//! worker threads or on scheduling order.

use rayon::prelude::*;
use targetzone_core::backtest::{run_strategy, BacktestReport, StrategyConfig};
use targetzone_core::simulate::{gap_moments, simulate_path, summarize_scaling, ScalingConfig, ScalingReport};
use targetzone_core::{ProcessSpec, Result, SimConfig, TimeSeries};

pub fn simulate_ensemble(spec: &ProcessSpec, cfg: &SimConfig) -> Result<Vec<TimeSeries>> {
    cfg.validate(spec)?;
    (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| simulate_path(spec, cfg, p))
        .collect()
}

pub fn moment_scaling(cfg: &ScalingConfig) -> Result<ScalingReport> {
    let per_gap = (0..cfg.gaps.len())
        .into_par_iter()
        .map(|i| gap_moments(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_scaling(per_gap))
}

/// Simulates every path, keeps every `sample_every`-th state and runs the strategy on
/// it. Trade logs are dropped.
pub fn backtest_ensemble(
    spec: &ProcessSpec,
    cfg: &SimConfig,
    strategy: &StrategyConfig,
    sample_every: usize,
) -> Result<Vec<BacktestReport>> {
    cfg.validate(spec)?;
    strategy.validate()?;
    (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let path = simulate_path(spec, cfg, p)?.subsample(sample_every)?;
            let mut report = run_strategy(&path, strategy)?;
            report.trades = Vec::new();
            Ok(report)
        })
        .collect()
}

/// Runs `f` on a pool of `threads` workers, or on the default pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> std::result::Result<T, String> {
    match threads {
        None => Ok(f()),
        Some(0) => Err("--threads must be >= 1".into()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| e.to_string()),
    }
}
