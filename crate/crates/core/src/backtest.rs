//! Threshold mean-reversion strategy: short the rate above `s_eq`, long below.
//!
//! The position chosen from `s_i` earns `s_{i+1} − s_i`. A position change at step
//! `i` is charged `cost_pips · 10⁻⁴ / e^{s_i}` in log-return units, once per change.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_non_negative, require_positive, Error, Result};
use crate::series::TimeSeries;
use crate::stats;

pub const PIP: f64 = 1e-4;
pub const HOURS_PER_YEAR: f64 = 365.0 * 24.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub s_eq: f64,
    pub cost_pips: f64,
    #[serde(default = "unit_size")]
    pub position_size: f64,
}

fn unit_size() -> f64 {
    1.0
}

impl StrategyConfig {
    pub fn new(s_eq: f64, cost_pips: f64) -> Self {
        Self {
            s_eq,
            cost_pips,
            position_size: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_finite("s_eq", self.s_eq)?;
        require_non_negative("cost_pips", self.cost_pips)?;
        require_positive("position_size", self.position_size)?;
        Ok(())
    }
}

/// One row of the trade log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub t: f64,
    pub s: f64,
    pub position: i8,
    pub step_return: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub n_trades: usize,
    pub gross_pnl: f64,
    pub total_costs: f64,
    pub net_pnl: f64,
    /// Annualized; `None` when the step returns have zero variance.
    pub sharpe: Option<f64>,
    pub steps_per_year: f64,
    #[serde(skip)]
    pub trades: Vec<TradeRecord>,
}

impl BacktestReport {
    pub fn step_returns(&self) -> impl Iterator<Item = f64> + '_ {
        self.trades.iter().map(|t| t.step_return)
    }
}

fn signal(s: f64, s_eq: f64, previous: i8) -> i8 {
    if s > s_eq {
        -1
    } else if s < s_eq {
        1
    } else {
        previous
    }
}

pub fn run_strategy(series: &TimeSeries, cfg: &StrategyConfig) -> Result<BacktestReport> {
    cfg.validate()?;
    let values = series.values();
    if values.len() < 2 {
        return Err(Error::InsufficientData(
            "a backtest needs at least two samples".into(),
        ));
    }
    let steps_per_year = HOURS_PER_YEAR / series.tau();
    let mut position = 0i8;
    let mut n_trades = 0usize;
    let mut gross = 0.0;
    let mut costs = 0.0;
    let mut trades = Vec::with_capacity(values.len() - 1);
    for (i, w) in values.windows(2).enumerate() {
        let s = w[0];
        let next = signal(s, cfg.s_eq, position);
        let mut cost = 0.0;
        if next != position {
            n_trades += 1;
            cost = cfg.position_size * cfg.cost_pips * PIP / s.exp();
        }
        position = next;
        let pnl = cfg.position_size * f64::from(position) * (w[1] - s);
        gross += pnl;
        costs += cost;
        trades.push(TradeRecord {
            t: series.elapsed_hours(i),
            s,
            position,
            step_return: pnl - cost,
        });
    }
    let returns: Vec<f64> = trades.iter().map(|t| t.step_return).collect();
    let sd = stats::sample_std(&returns);
    let sharpe = if sd > 0.0 && sd.is_finite() {
        Some(stats::mean(&returns) / sd * steps_per_year.sqrt())
    } else {
        None
    };
    Ok(BacktestReport {
        n_trades,
        gross_pnl: gross,
        total_costs: costs,
        net_pnl: gross - costs,
        sharpe,
        steps_per_year,
        trades,
    })
}
