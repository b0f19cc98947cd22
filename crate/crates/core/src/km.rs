//! Binned Kramers–Moyal estimates of drift and volatility.
//!
//! The value range is cut into `K` equal-width bins. Every sample that has a
//! successor contributes its increment `Δ = s[i+1] − s[i]` to the bin holding `s[i]`:
//!
//! ```text
//! f̂ = Σ Δ / (τ N),     ĝ = √( Σ Δ² / (τ N) )
//! ```
//!
//! with `N` the bin count. Bins are half-open `[left, right)` except the last one,
//! which also holds the global maximum.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_volatility, Weighting};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinConfig {
    pub n_bins: usize,
    /// Optional `(s_min, s_max)` replacing the data range; samples outside are skipped.
    pub range: Option<(f64, f64)>,
    pub min_count: usize,
}

impl Default for BinConfig {
    fn default() -> Self {
        Self {
            n_bins: 100,
            range: None,
            min_count: 10,
        }
    }
}

impl BinConfig {
    pub fn with_bins(n_bins: usize) -> Self {
        Self {
            n_bins,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bins < 2 {
            return Err(Error::param("n_bins", "must be >= 2"));
        }
        if self.min_count < 2 {
            return Err(Error::param("min_count", "must be >= 2"));
        }
        if let Some((lo, hi)) = self.range {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::param("range", "needs finite s_min < s_max"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmBin {
    pub s_mid: f64,
    pub f_hat: f64,
    pub g_hat: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmEstimate {
    /// Reported bins, midpoints strictly increasing.
    pub bins: Vec<KmBin>,
    pub tau: f64,
    /// Increments assigned to any bin, including under-populated ones.
    pub assigned: usize,
}

impl KmEstimate {
    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.bins.iter().map(|b| b.s_mid)
    }

    pub fn total_count(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }
}

#[derive(Clone, Copy, Default)]
struct Accum {
    count: usize,
    sum: f64,
    sum_sq: f64,
}

struct Binning {
    lo: f64,
    width: f64,
    n_bins: usize,
    clip: Option<(f64, f64)>,
}

impl Binning {
    fn index(&self, s: f64) -> Option<usize> {
        if let Some((lo, hi)) = self.clip {
            if s < lo || s > hi {
                return None;
            }
        }
        if self.width == 0.0 {
            return Some(0);
        }
        let k = ((s - self.lo) / self.width).floor();
        if k < 0.0 {
            return Some(0);
        }
        Some((k as usize).min(self.n_bins - 1))
    }

    fn midpoint(&self, k: usize) -> f64 {
        self.lo + (k as f64 + 0.5) * self.width
    }
}

/// Estimate from one series.
pub fn estimate(series: &TimeSeries, cfg: &BinConfig) -> Result<KmEstimate> {
    estimate_pooled(core::slice::from_ref(series), cfg)
}

/// Estimate from one series, skipping increment `i → i+1` wherever `usable[i]` is false.
pub fn estimate_masked(series: &TimeSeries, usable: &[bool], cfg: &BinConfig) -> Result<KmEstimate> {
    if usable.len() + 1 != series.len() {
        return Err(Error::Domain(alloc::format!(
            "increment mask has {} entries for {} samples",
            usable.len(),
            series.len()
        )));
    }
    estimate_impl(&[(series, Some(usable))], cfg)
}

/// Estimate from an ensemble of independent series sharing one `tau`; the bin range
/// spans all of them and increments never cross series boundaries.
pub fn estimate_pooled(series: &[TimeSeries], cfg: &BinConfig) -> Result<KmEstimate> {
    let parts: Vec<(&TimeSeries, Option<&[bool]>)> = series.iter().map(|s| (s, None)).collect();
    estimate_impl(&parts, cfg)
}

fn estimate_impl(parts: &[(&TimeSeries, Option<&[bool]>)], cfg: &BinConfig) -> Result<KmEstimate> {
    cfg.validate()?;
    let first = parts
        .first()
        .ok_or_else(|| Error::InsufficientData("no series supplied".into()))?;
    let tau = first.0.tau();
    for (s, _) in parts {
        if s.len() < 2 {
            return Err(Error::InsufficientData(alloc::format!(
                "a series has {} sample(s); at least 2 are needed",
                s.len()
            )));
        }
        if (s.tau() - tau).abs() > 1e-12 * tau {
            return Err(Error::Domain("pooled series must share tau".into()));
        }
    }

    let (lo, hi) = match cfg.range {
        Some(r) => r,
        None => parts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (s, _)| {
            (lo.min(s.min()), hi.max(s.max()))
        }),
    };
    let binning = Binning {
        lo,
        width: (hi - lo) / cfg.n_bins as f64,
        n_bins: cfg.n_bins,
        clip: cfg.range,
    };

    let mut acc = vec![Accum::default(); cfg.n_bins];
    let mut assigned = 0usize;
    for (series, mask) in parts {
        let v = series.values();
        for i in 0..v.len() - 1 {
            if let Some(m) = mask {
                if !m[i] {
                    continue;
                }
            }
            if let Some(k) = binning.index(v[i]) {
                let d = v[i + 1] - v[i];
                let a = &mut acc[k];
                a.count += 1;
                a.sum += d;
                a.sum_sq += d * d;
                assigned += 1;
            }
        }
    }

    let bins: Vec<KmBin> = acc
        .iter()
        .enumerate()
        .filter(|(_, a)| a.count >= cfg.min_count)
        .map(|(k, a)| {
            let n = a.count as f64;
            KmBin {
                s_mid: binning.midpoint(k),
                f_hat: a.sum / (tau * n),
                g_hat: (a.sum_sq / (tau * n)).sqrt(),
                count: a.count,
            }
        })
        .collect();
    if bins.is_empty() {
        return Err(Error::InsufficientData(alloc::format!(
            "no bin reached min_count = {} ({} increments assigned)",
            cfg.min_count,
            assigned
        )));
    }
    Ok(KmEstimate { bins, tau, assigned })
}

/// One cell of a robustness scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n_bins: usize,
    pub subsample: usize,
    pub reported_bins: usize,
    pub beta_hat: f64,
    pub beta_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessScan {
    pub rows: Vec<ScanRow>,
    /// `(max β − min β) / mean β` over all rows.
    pub relative_spread: f64,
}

/// Re-estimates `β` of `g(s) = β √(s − s̲)` for every (bin count, subsampling factor).
pub fn robustness_scan(
    series: &[TimeSeries],
    n_bins: &[usize],
    subsample: &[usize],
    barrier: f64,
    template: &BinConfig,
    weighting: Weighting,
) -> Result<RobustnessScan> {
    if n_bins.is_empty() || subsample.is_empty() {
        return Err(Error::param("scan grid", "needs at least one K and one factor"));
    }
    let mut rows = Vec::with_capacity(n_bins.len() * subsample.len());
    for &m in subsample {
        let thinned = series
            .iter()
            .map(|s| s.subsample(m))
            .collect::<Result<Vec<_>>>()?;
        for &k in n_bins {
            let cfg = BinConfig {
                n_bins: k,
                ..*template
            };
            let est = estimate_pooled(&thinned, &cfg)?;
            let beta = fit_volatility(&est, barrier, weighting)?;
            rows.push(ScanRow {
                n_bins: k,
                subsample: m,
                reported_bins: est.bins.len(),
                beta_hat: beta.value,
                beta_se: beta.se,
            });
        }
    }
    let (lo, hi, sum) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), r| {
        (lo.min(r.beta_hat), hi.max(r.beta_hat), s + r.beta_hat)
    });
    let mean = sum / rows.len() as f64;
    Ok(RobustnessScan {
        rows,
        relative_spread: (hi - lo) / mean,
    })
}
