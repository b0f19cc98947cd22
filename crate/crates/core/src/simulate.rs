//! Euler–Maruyama integration of [`ProcessSpec`] models.
//!
//! Each path owns a ChaCha8 stream keyed by the run seed and selected by the path
//! index, so paths can be generated in any order (or in parallel) and still be
//! bit-identical to a sequential run.

use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, Error, Result};
use crate::process::{Model, ProcessSpec};
use crate::series::TimeSeries;
use crate::stats::{linear_regression, Moments};
use crate::TEN_SECOND_TAU;

/// What happens when an Euler step lands below the barrier.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// `s ← 2 s̲ − s`
    #[default]
    Reflect,
    /// `s ← s̲`
    Clamp,
}

impl BoundaryPolicy {
    #[inline]
    pub fn apply(self, s: f64, barrier: f64) -> f64 {
        if s >= barrier {
            return s;
        }
        match self {
            // written as barrier + overshoot so rounding can never land below the barrier
            BoundaryPolicy::Reflect => barrier + (barrier - s),
            BoundaryPolicy::Clamp => barrier,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Euler steps per path.
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub initial_s: f64,
    /// Integration step in hours.
    pub tau: f64,
    /// Keep every `record_every`-th state; the emitted series has step `record_every * tau`.
    pub record_every: usize,
    pub boundary: BoundaryPolicy,
}

impl SimConfig {
    /// One path of `n_steps` 10-second steps, recording every state.
    pub fn new(n_steps: usize, seed: u64, initial_s: f64) -> Self {
        Self {
            n_steps,
            n_paths: 1,
            seed,
            initial_s,
            tau: TEN_SECOND_TAU,
            record_every: 1,
            boundary: BoundaryPolicy::Reflect,
        }
    }

    pub fn with_paths(mut self, n_paths: usize) -> Self {
        self.n_paths = n_paths;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_record_every(mut self, record_every: usize) -> Self {
        self.record_every = record_every;
        self
    }

    pub fn with_boundary(mut self, boundary: BoundaryPolicy) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self, spec: &ProcessSpec) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::param("n_steps", "must be >= 1"));
        }
        if self.n_paths == 0 {
            return Err(Error::param("n_paths", "must be >= 1"));
        }
        if self.record_every == 0 {
            return Err(Error::param("record_every", "must be >= 1"));
        }
        require_positive("tau", self.tau)?;
        require_finite("initial_s", self.initial_s)?;
        if let Some(b) = spec.barrier() {
            if self.initial_s < b {
                return Err(Error::BelowBarrier {
                    what: "initial_s",
                    value: self.initial_s,
                    barrier: b,
                });
            }
        }
        Ok(())
    }

    /// Number of samples in each emitted series.
    pub fn samples_per_path(&self) -> usize {
        self.n_steps / self.record_every + 1
    }
}

/// The random stream for one path.
pub fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A single Euler–Maruyama trajectory advanced one step at a time.
#[derive(Debug, Clone)]
pub struct PathStepper {
    spec: ProcessSpec,
    tau: f64,
    sqrt_tau: f64,
    boundary: BoundaryPolicy,
    rng: ChaCha8Rng,
    state: f64,
    step: usize,
    path: usize,
}

impl PathStepper {
    pub fn new(spec: ProcessSpec, cfg: &SimConfig, path: usize) -> Result<Self> {
        cfg.validate(&spec)?;
        Ok(Self::with_stream(spec, cfg, path, path as u64))
    }

    pub(crate) fn with_stream(spec: ProcessSpec, cfg: &SimConfig, path: usize, stream: u64) -> Self {
        Self {
            spec,
            tau: cfg.tau,
            sqrt_tau: cfg.tau.sqrt(),
            boundary: cfg.boundary,
            rng: path_rng(cfg.seed, stream),
            state: cfg.initial_s,
            step: 0,
            path,
        }
    }

    pub fn state(&self) -> f64 {
        self.state
    }

    /// Advances one step and returns the new state.
    #[inline]
    pub fn advance(&mut self) -> Result<f64> {
        let z: f64 = self.rng.sample(StandardNormal);
        let s = self.state;
        let mut next = s + self.spec.drift_unchecked(s) * self.tau
            + self.spec.volatility_clamped(s) * self.sqrt_tau * z;
        self.step += 1;
        if !next.is_finite() {
            return Err(Error::Integration {
                path: self.path,
                step: self.step,
            });
        }
        if let Some(b) = self.spec.barrier() {
            next = self.boundary.apply(next, b);
        }
        self.state = next;
        Ok(next)
    }
}

/// Simulates path number `path` of the ensemble described by `cfg`.
pub fn simulate_path(spec: &ProcessSpec, cfg: &SimConfig, path: usize) -> Result<TimeSeries> {
    let mut stepper = PathStepper::new(*spec, cfg, path)?;
    let mut values = Vec::with_capacity(cfg.samples_per_path());
    values.push(cfg.initial_s);
    for step in 1..=cfg.n_steps {
        let s = stepper.advance()?;
        if step % cfg.record_every == 0 {
            values.push(s);
        }
    }
    TimeSeries::from_values(cfg.tau * cfg.record_every as f64, values)
}

/// Simulates all `cfg.n_paths` paths sequentially.
pub fn simulate(spec: &ProcessSpec, cfg: &SimConfig) -> Result<Vec<TimeSeries>> {
    cfg.validate(spec)?;
    (0..cfg.n_paths).map(|p| simulate_path(spec, cfg, p)).collect()
}

/// How the physical potential is varied when the equilibrium gap changes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialFamily {
    /// Keep the entropic constant `C`; the pressure becomes `F = C / gap²`.
    FixedRepulsion { c: f64 },
    /// Keep the pressure `F`; the entropic constant becomes `C = F · gap²`.
    FixedPressure { f: f64 },
}

impl PotentialFamily {
    /// `(C, F)` placing the equilibrium `gap` above the barrier.
    pub fn constants(&self, gap: f64) -> (f64, f64) {
        match *self {
            PotentialFamily::FixedRepulsion { c } => (c, c / (gap * gap)),
            PotentialFamily::FixedPressure { f } => (f * gap * gap, f),
        }
    }
}

/// Monte Carlo set-up for the stationary-moment scaling of the physical potential.
///
/// Time is measured per gap in units of the relaxation time `1/κ`, `κ = 2 √(F³/C)`,
/// so every gap is integrated with the same `κ τ` and the same effective sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub family: PotentialFamily,
    pub vol: f64,
    pub gaps: Vec<f64>,
    pub barrier: f64,
    /// Euler steps per relaxation time (`κ τ = 1 / steps_per_relaxation`).
    pub steps_per_relaxation: f64,
    /// Recorded run length per path, in relaxation times.
    pub relaxations: f64,
    /// Discarded start-up, in relaxation times.
    pub burn_in_relaxations: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl ScalingConfig {
    pub fn new(family: PotentialFamily, vol: f64, gaps: Vec<f64>) -> Self {
        Self {
            family,
            vol,
            gaps,
            barrier: 0.0,
            steps_per_relaxation: 50.0,
            relaxations: 1.0e5,
            burn_in_relaxations: 10.0,
            n_paths: 1,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.gaps.is_empty() {
            return Err(Error::param("gaps", "at least one gap is required"));
        }
        for &g in &self.gaps {
            require_positive("gap", g)?;
        }
        match self.family {
            PotentialFamily::FixedRepulsion { c } => require_positive("C", c)?,
            PotentialFamily::FixedPressure { f } => require_positive("F", f)?,
        };
        require_finite("vol", self.vol)?;
        if self.vol < 0.0 {
            return Err(Error::param("vol", "must be >= 0"));
        }
        require_positive("steps_per_relaxation", self.steps_per_relaxation)?;
        require_positive("relaxations", self.relaxations)?;
        if !(self.burn_in_relaxations >= 0.0) {
            return Err(Error::param("burn_in_relaxations", "must be >= 0"));
        }
        if self.n_paths == 0 {
            return Err(Error::param("n_paths", "must be >= 1"));
        }
        Ok(())
    }
}

/// Stationary moments of `s` at one equilibrium gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapMoments {
    pub gap: f64,
    pub c: f64,
    pub f: f64,
    /// `κ = 2 √(F³/C)`, 1/hour.
    pub relaxation_rate: f64,
    pub tau: f64,
    pub samples: u64,
    pub mean_offset: f64,
    /// Stationary standard deviation of `s`.
    pub std_dev: f64,
    /// Standardized skewness `m3 / m2^{3/2}`.
    pub skewness: f64,
    /// Third central moment over the variance, `m3 / m2`.
    pub skewness_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub per_gap: Vec<GapMoments>,
    /// Log–log slope of `std_dev` against the gap.
    pub volatility_exponent: Option<f64>,
    /// Log–log slope of the standardized skewness.
    pub skewness_exponent: Option<f64>,
    /// Log–log slope of `m3 / m2`.
    pub skewness_scale_exponent: Option<f64>,
}

/// Runs all paths for gap number `index` of `cfg`.
pub fn gap_moments(cfg: &ScalingConfig, index: usize) -> Result<GapMoments> {
    cfg.validate()?;
    let gap = *cfg
        .gaps
        .get(index)
        .ok_or_else(|| Error::param("gap index", "out of range"))?;
    let (c, f) = cfg.family.constants(gap);
    let spec = ProcessSpec::physical_potential(c, f, cfg.vol, cfg.barrier)?;
    let (kappa, quad) = spec.potential_coefficients().expect("physical potential");
    let s_eq = cfg.barrier + gap;
    // beyond the second root of the expanded drift the path escapes to infinity
    let escape = kappa / quad;
    let tau = 1.0 / (kappa * cfg.steps_per_relaxation);
    let burn_in = libm::ceil(cfg.burn_in_relaxations * cfg.steps_per_relaxation) as usize;
    let recorded = libm::ceil(cfg.relaxations * cfg.steps_per_relaxation) as usize;
    let sim = SimConfig::new(burn_in + recorded, cfg.seed, s_eq).with_tau(tau);

    let mut total = Moments::new();
    for path in 0..cfg.n_paths {
        let stream = (index * cfg.n_paths + path) as u64;
        let mut stepper = PathStepper::with_stream(spec, &sim, path, stream);
        let mut acc = Moments::new();
        for step in 1..=sim.n_steps {
            let s = stepper.advance()?;
            let y = s - s_eq;
            if y > escape {
                return Err(Error::Diverged { path, step, value: s });
            }
            if step > burn_in {
                acc.push(y);
            }
        }
        total.merge(&acc);
    }
    let variance = total.variance();
    Ok(GapMoments {
        gap,
        c,
        f,
        relaxation_rate: kappa,
        tau,
        samples: total.count(),
        mean_offset: total.mean(),
        std_dev: total.std_dev(),
        skewness: total.skewness(),
        skewness_scale: if variance > 0.0 {
            total.third_central() / variance
        } else {
            0.0
        },
    })
}

/// Log–log slopes of the per-gap moments. A slope is `None` when fewer than two gaps
/// are present or a moment is not strictly positive.
pub fn summarize_scaling(per_gap: Vec<GapMoments>) -> ScalingReport {
    let slope = |pick: fn(&GapMoments) -> f64| -> Option<f64> {
        if per_gap.iter().any(|m| !(pick(m) > 0.0)) {
            return None;
        }
        let x: Vec<f64> = per_gap.iter().map(|m| m.gap.ln()).collect();
        let y: Vec<f64> = per_gap.iter().map(|m| pick(m).ln()).collect();
        linear_regression(&x, &y).ok().map(|fit| fit.slope)
    };
    ScalingReport {
        volatility_exponent: slope(|m| m.std_dev),
        skewness_exponent: slope(|m| m.skewness),
        skewness_scale_exponent: slope(|m| m.skewness_scale),
        per_gap,
    }
}

/// Stationary volatility and skewness of the physical potential for each gap, plus
/// their log–log scaling exponents.
pub fn moment_scaling_experiment(cfg: &ScalingConfig) -> Result<ScalingReport> {
    cfg.validate()?;
    let per_gap = (0..cfg.gaps.len())
        .map(|i| gap_moments(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_scaling(per_gap))
}

/// Returns `true` when the model's noise vanishes identically.
pub fn is_deterministic(spec: &ProcessSpec) -> bool {
    matches!(
        spec.model(),
        Model::Gbm { vol, .. } | Model::PhysicalPotential { vol, .. } if *vol == 0.0
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_gbm_is_constant() {
        let spec = ProcessSpec::gbm(0.0, 0.0).unwrap();
        let path = simulate_path(&spec, &SimConfig::new(1000, 99, 0.3), 0).unwrap();
        assert!(path.values().iter().all(|&s| s == 0.3));
        assert!(is_deterministic(&spec));
    }

    #[test]
    fn same_seed_same_path() {
        let spec = ProcessSpec::krugman_local(1e-5, 5.42e-3, 0.18).unwrap();
        let cfg = SimConfig::new(5000, 7, 0.19).with_paths(3);
        let a = simulate(&spec, &cfg).unwrap();
        let b = simulate(&spec, &cfg).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
        assert_eq!(simulate_path(&spec, &cfg, 2).unwrap(), a[2]);
    }

    #[test]
    fn hindered_path_from_barrier_stays_above() {
        let barrier = crate::eurchf_floor();
        let spec = ProcessSpec::hindered_diffusion(5.42e-3, barrier).unwrap();
        for policy in [BoundaryPolicy::Reflect, BoundaryPolicy::Clamp] {
            let cfg = SimConfig::new(200_000, 3, barrier).with_boundary(policy);
            let path = simulate_path(&spec, &cfg, 0).unwrap();
            assert!(path.values().iter().all(|&s| s >= barrier));
        }
    }

    #[test]
    fn record_every_thins_the_output() {
        let spec = ProcessSpec::gbm(0.0, 1.0).unwrap();
        let full = simulate_path(&spec, &SimConfig::new(100, 5, 0.0), 0).unwrap();
        let thin = simulate_path(&spec, &SimConfig::new(100, 5, 0.0).with_record_every(10), 0).unwrap();
        assert_eq!(thin.len(), 11);
        assert_eq!(thin.values()[10], full.values()[100]);
        assert!((thin.tau() - 10.0 * full.tau()).abs() < 1e-18);
    }

    #[test]
    fn rejects_start_below_barrier() {
        let spec = ProcessSpec::krugman_local(0.0, 1.0, 1.0).unwrap();
        assert!(simulate(&spec, &SimConfig::new(10, 0, 0.5)).is_err());
        assert!(simulate(&spec, &SimConfig::new(0, 0, 1.5)).is_err());
    }

    #[test]
    fn non_finite_state_names_the_step() {
        let spec = ProcessSpec::gbm(f64::MAX, 0.0).unwrap();
        let err = simulate_path(&spec, &SimConfig::new(10, 0, f64::MAX).with_tau(10.0), 0).unwrap_err();
        assert_eq!(err, Error::Integration { path: 0, step: 1 });
    }

    #[test]
    fn reflect_and_clamp() {
        assert_eq!(BoundaryPolicy::Reflect.apply(0.75, 1.0), 1.25);
        assert_eq!(BoundaryPolicy::Clamp.apply(0.75, 1.0), 1.0);
        assert_eq!(BoundaryPolicy::Reflect.apply(1.5, 1.0), 1.5);
    }

    #[test]
    fn zero_noise_scaling_has_zero_volatility() {
        let mut cfg = ScalingConfig::new(PotentialFamily::FixedRepulsion { c: 1.0 }, 0.0, alloc::vec![0.5]);
        cfg.relaxations = 20.0;
        let report = moment_scaling_experiment(&cfg).unwrap();
        assert_eq!(report.per_gap[0].std_dev, 0.0);
        assert_eq!(report.volatility_exponent, None);
    }

    #[test]
    fn family_constants_place_equilibrium() {
        for family in [
            PotentialFamily::FixedRepulsion { c: 2.0 },
            PotentialFamily::FixedPressure { f: 3.0 },
        ] {
            let (c, f) = family.constants(0.25);
            assert!(((c / f).sqrt() - 0.25).abs() < 1e-15);
        }
    }
}
