use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Microseconds per hour.
pub const MICROS_PER_HOUR: f64 = 3.6e9;

/// Uniformly spaced log-rate samples.
///
/// `t0_us` anchors the first sample in microseconds since the Unix epoch (zero for
/// unanchored simulations); sample `i` sits at `t0 + i * tau` hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSeries")]
pub struct TimeSeries {
    t0_us: i64,
    tau: f64,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSeries {
    t0_us: i64,
    tau: f64,
    values: Vec<f64>,
}

impl TryFrom<RawSeries> for TimeSeries {
    type Error = Error;

    fn try_from(raw: RawSeries) -> Result<Self> {
        TimeSeries::new(raw.t0_us, raw.tau, raw.values)
    }
}

impl TimeSeries {
    pub fn new(t0_us: i64, tau: f64, values: Vec<f64>) -> Result<Self> {
        require_positive("tau", tau)?;
        if values.is_empty() {
            return Err(Error::InsufficientData("a time series needs at least one sample".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(alloc::format!(
                "sample {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self { t0_us, tau, values })
    }

    /// Unanchored series starting at time zero.
    pub fn from_values(tau: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(0, tau, values)
    }

    pub fn t0_us(&self) -> i64 {
        self.t0_us
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Hours elapsed since the first sample.
    pub fn elapsed_hours(&self, i: usize) -> f64 {
        i as f64 * self.tau
    }

    /// Absolute time of sample `i` in microseconds since the epoch.
    pub fn timestamp_us(&self, i: usize) -> i64 {
        self.t0_us + libm::round(self.elapsed_hours(i) * MICROS_PER_HOUR) as i64
    }

    /// Successive differences `s[i+1] - s[i]`.
    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.windows(2).map(|w| w[1] - w[0])
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every `factor`-th sample with the step scaled to `factor * tau`.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::param("subsample factor", "must be >= 1"));
        }
        let values = self.values.iter().step_by(factor).copied().collect();
        Self::new(self.t0_us, self.tau * factor as f64, values)
    }

    /// The same series shifted by a constant in log-rate.
    pub fn shifted(&self, offset: f64) -> Result<Self> {
        let values = self.values.iter().map(|v| v + offset).collect();
        Self::new(self.t0_us, self.tau, values)
    }
}
