//! Simulation, estimation and hypothesis testing for diffusions constrained by a
//! one-sided barrier ("target zones").
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches files,
//! threads or the command line lives in the `targetzone` companion crate.
//!
//! Units: time is measured in hours, states are log exchange rates. A 10-second
//! sampling interval is therefore `tau = 1/360`.

#![no_std]
#![deny(missing_debug_implementations)]
// `num_traits::Float` supplies float math without std; when std is in the build graph
// (tests, dev-dependencies) its inherent methods take precedence and the import looks unused
#![allow(unused_imports)]

extern crate alloc;

pub mod backtest;
pub mod coarse;
pub mod error;
pub mod fit;
pub mod hindered;
pub mod km;
pub mod krugman;
pub mod process;
pub mod series;
pub mod simulate;
pub mod stats;

pub use error::{Error, ErrorKind, Result};
pub use process::{Model, ProcessSpec};
pub use series::TimeSeries;
pub use simulate::{BoundaryPolicy, SimConfig};

/// `log(1.20)`: the EUR/CHF floor in log-rate units.
pub fn eurchf_floor() -> f64 {
    libm::log(1.20)
}

/// Samples per hour at a 10-second resolution.
pub const TEN_SECONDS_PER_HOUR: f64 = 360.0;

/// `1/360` hours.
pub const TEN_SECOND_TAU: f64 = 1.0 / TEN_SECONDS_PER_HOUR;
