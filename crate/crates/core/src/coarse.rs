//! Irregular ticks to an equally spaced series of log window medians.
//!
//! Slots are `[k·w, (k+1)·w)` on the absolute clock, starting at the first tick's slot.
//! Each nonempty slot yields the lower median of its prices; empty slots repeat the
//! previous value and are flagged so that increments across long outages can be
//! dropped downstream.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::series::{TimeSeries, MICROS_PER_HOUR};

pub const DEFAULT_WINDOW_SECS: f64 = 10.0;
/// Longest run of empty slots an increment may touch and still be used.
pub const DEFAULT_MAX_GAP: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    /// Microseconds since the Unix epoch, UTC.
    pub timestamp_us: i64,
    /// Level, not log. The mid when a quote is present.
    pub price: f64,
    pub quote: Option<(f64, f64)>,
}

impl TickRecord {
    pub fn new(timestamp_us: i64, price: f64) -> Result<Self> {
        require_positive("price", price)?;
        Ok(Self {
            timestamp_us,
            price,
            quote: None,
        })
    }

    pub fn from_quote(timestamp_us: i64, bid: f64, ask: f64) -> Result<Self> {
        require_positive("bid", bid)?;
        require_positive("ask", ask)?;
        if bid > ask {
            return Err(Error::Domain(alloc::format!(
                "crossed quote: bid {bid} > ask {ask}"
            )));
        }
        Ok(Self {
            timestamp_us,
            price: 0.5 * (bid + ask),
            quote: Some((bid, ask)),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoarseSeries {
    pub series: TimeSeries,
    /// `observed[k]` is false where slot `k` had no tick and was carried forward.
    pub observed: Vec<bool>,
}

impl CoarseSeries {
    pub fn usable_increments(&self, max_gap: usize) -> Vec<bool> {
        gap_mask(&self.observed, max_gap)
    }
}

fn window_micros(window_secs: f64) -> Result<i64> {
    require_positive("window", window_secs)?;
    let us = (window_secs * 1e6).round();
    if us < 1.0 || us > 1e15 {
        return Err(Error::param("window", "must lie between 1 µs and ~30 years"));
    }
    Ok(us as i64)
}

/// Lower median: element `(n−1)/2` of the sorted slice.
pub fn lower_median(prices: &mut [f64]) -> f64 {
    prices.sort_unstable_by(f64::total_cmp);
    prices[(prices.len() - 1) / 2]
}

pub fn coarse_grain(ticks: &[TickRecord], window_secs: f64) -> Result<CoarseSeries> {
    if ticks.is_empty() {
        return Err(Error::InsufficientData("no ticks to coarse-grain".into()));
    }
    let w = window_micros(window_secs)?;
    for t in ticks {
        require_positive("price", t.price)?;
    }
    let mut sorted: Vec<(i64, f64)> = ticks.iter().map(|t| (t.timestamp_us, t.price)).collect();
    sorted.sort_by_key(|&(ts, _)| ts);
    let first_slot = sorted[0].0.div_euclid(w);
    let last_slot = sorted[sorted.len() - 1].0.div_euclid(w);
    let n_slots = usize::try_from(last_slot - first_slot + 1)
        .map_err(|_| Error::Domain("tick span overflows the slot count".into()))?;

    let mut values = Vec::with_capacity(n_slots);
    let mut observed = Vec::with_capacity(n_slots);
    let mut bucket: Vec<f64> = Vec::new();
    let mut i = 0;
    for k in 0..n_slots as i64 {
        let slot = first_slot + k;
        bucket.clear();
        while i < sorted.len() && sorted[i].0.div_euclid(w) == slot {
            bucket.push(sorted[i].1);
            i += 1;
        }
        if bucket.is_empty() {
            // the first slot always holds the first tick
            let prev = *values.last().expect("first slot is nonempty");
            values.push(prev);
            observed.push(false);
        } else {
            values.push(lower_median(&mut bucket).ln());
            observed.push(true);
        }
    }
    let tau = w as f64 / MICROS_PER_HOUR;
    Ok(CoarseSeries {
        series: TimeSeries::new(first_slot * w, tau, values)?,
        observed,
    })
}

/// One flag per increment `k → k+1`: false when either end touches a run of more than
/// `max_gap` consecutive empty slots.
pub fn gap_mask(observed: &[bool], max_gap: usize) -> Vec<bool> {
    let n = observed.len();
    let mut usable = alloc::vec![true; n.saturating_sub(1)];
    let mut k = 0;
    while k < n {
        if observed[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < n && !observed[k] {
            k += 1;
        }
        let end = k - 1;
        if end + 1 - start > max_gap {
            let from = start.saturating_sub(1);
            let to = end.min(usable.len().saturating_sub(1));
            for u in usable.iter_mut().take(to + 1).skip(from) {
                *u = false;
            }
        }
    }
    usable
}
