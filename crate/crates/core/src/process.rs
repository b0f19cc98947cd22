//! The catalog of barrier diffusions `ds = f(s) dt + g(s) dW` (Itô).
//!
//! | model                | drift `f(s)`                                   | volatility `g(s)`   |
//! |----------------------|------------------------------------------------|---------------------|
//! | `Gbm`                | constant                                       | constant            |
//! | `PhysicalPotential`  | `3 F²/C · y² − 2 √(F³/C) · y`, `y = s − s_eq`  | constant            |
//! | `KrugmanLocal`       | `α`                                            | `β √(s − s̲)`        |
//! | `HinderedDiffusion`  | `β² / 2` (noise-induced)                       | `β √(s − s̲)`        |
//!
//! The physical potential `C/(s − s̲) + F (s − s̲)` has its minimum at
//! `s_eq = s̲ + √(C/F)`; the drift above is its second-order expansion there.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_non_negative, require_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    Gbm { drift: f64, vol: f64 },
    PhysicalPotential { c: f64, f: f64, vol: f64 },
    KrugmanLocal { alpha: f64, beta: f64 },
    HinderedDiffusion { beta: f64 },
}

/// A validated model together with its barrier `s̲` (absent only for GBM).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct ProcessSpec {
    #[serde(flatten)]
    model: Model,
    barrier: Option<f64>,
}

#[derive(Deserialize)]
struct RawSpec {
    #[serde(flatten)]
    model: Model,
    barrier: Option<f64>,
}

impl TryFrom<RawSpec> for ProcessSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        ProcessSpec::new(raw.model, raw.barrier)
    }
}

impl ProcessSpec {
    pub fn new(model: Model, barrier: Option<f64>) -> Result<Self> {
        match model {
            Model::Gbm { drift, vol } => {
                require_finite("drift", drift)?;
                // zero volatility is allowed: it yields the deterministic limit
                require_non_negative("vol", vol)?;
            }
            Model::PhysicalPotential { c, f, vol } => {
                require_positive("C", c)?;
                require_positive("F", f)?;
                require_non_negative("vol", vol)?;
                if !(c / f).sqrt().is_finite() {
                    return Err(Error::param("C/F", "equilibrium gap is not finite"));
                }
            }
            Model::KrugmanLocal { alpha, beta } => {
                require_finite("alpha", alpha)?;
                require_positive("beta", beta)?;
            }
            Model::HinderedDiffusion { beta } => {
                require_positive("beta", beta)?;
            }
        }
        match (model, barrier) {
            (Model::Gbm { .. }, None) => {}
            (_, Some(b)) => {
                require_finite("barrier", b)?;
            }
            (_, None) => return Err(Error::param("barrier", "required for barrier models")),
        }
        Ok(Self { model, barrier })
    }

    pub fn gbm(drift: f64, vol: f64) -> Result<Self> {
        Self::new(Model::Gbm { drift, vol }, None)
    }

    pub fn physical_potential(c: f64, f: f64, vol: f64, barrier: f64) -> Result<Self> {
        Self::new(Model::PhysicalPotential { c, f, vol }, Some(barrier))
    }

    pub fn krugman_local(alpha: f64, beta: f64, barrier: f64) -> Result<Self> {
        Self::new(Model::KrugmanLocal { alpha, beta }, Some(barrier))
    }

    pub fn hindered_diffusion(beta: f64, barrier: f64) -> Result<Self> {
        Self::new(Model::HinderedDiffusion { beta }, Some(barrier))
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn barrier(&self) -> Option<f64> {
        self.barrier
    }

    /// `s_eq = s̲ + √(C/F)` for the physical potential.
    pub fn equilibrium(&self) -> Option<f64> {
        match (self.model, self.barrier) {
            (Model::PhysicalPotential { c, f, .. }, Some(b)) => Some(b + (c / f).sqrt()),
            _ => None,
        }
    }

    /// Linear relaxation rate `2 √(F³/C)` and quadratic coefficient `3 F²/C` of the
    /// expanded physical drift.
    pub fn potential_coefficients(&self) -> Option<(f64, f64)> {
        match self.model {
            Model::PhysicalPotential { c, f, .. } => Some((2.0 * (f * f * f / c).sqrt(), 3.0 * f * f / c)),
            _ => None,
        }
    }

    fn check_domain(&self, s: f64) -> Result<()> {
        match self.barrier {
            Some(b) if s < b => Err(Error::BelowBarrier {
                what: "s",
                value: s,
                barrier: b,
            }),
            _ => Ok(()),
        }
    }

    /// Drift `f(s)` in 1/hour.
    pub fn drift(&self, s: f64) -> Result<f64> {
        self.check_domain(s)?;
        Ok(self.drift_unchecked(s))
    }

    /// Volatility `g(s)` in 1/√hour.
    pub fn volatility(&self, s: f64) -> Result<f64> {
        self.check_domain(s)?;
        Ok(self.volatility_clamped(s))
    }

    pub(crate) fn drift_unchecked(&self, s: f64) -> f64 {
        match self.model {
            Model::Gbm { drift, .. } => drift,
            Model::PhysicalPotential { c, f, .. } => {
                let y = s - self.barrier.unwrap_or(0.0) - (c / f).sqrt();
                3.0 * (f * f / c) * y * y - 2.0 * (f * f * f / c).sqrt() * y
            }
            Model::KrugmanLocal { alpha, .. } => alpha,
            Model::HinderedDiffusion { beta } => 0.5 * beta * beta,
        }
    }

    /// Volatility with the gap floored at zero, so states that undershoot the
    /// barrier inside an Euler step never produce a NaN.
    pub(crate) fn volatility_clamped(&self, s: f64) -> f64 {
        match self.model {
            Model::Gbm { vol, .. } | Model::PhysicalPotential { vol, .. } => vol,
            Model::KrugmanLocal { beta, .. } | Model::HinderedDiffusion { beta } => {
                let gap = s - self.barrier.unwrap_or(0.0);
                beta * gap.max(0.0).sqrt()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn physical_drift_vanishes_at_equilibrium() {
        let spec = ProcessSpec::physical_potential(2.0, 0.5, 0.1, 0.3).unwrap();
        let s_eq = spec.equilibrium().unwrap();
        assert!((s_eq - 2.3).abs() < 1e-15);
        assert!(spec.drift(s_eq).unwrap().abs() < 1e-15);
    }

    #[test]
    fn physical_drift_hand_value() {
        // C = F = 1, barrier 0: s_eq = 1 and at s = 2 the drift is 3 - 2 = 1.
        let spec = ProcessSpec::physical_potential(1.0, 1.0, 0.0, 0.0).unwrap();
        assert!((spec.drift(2.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hindered_drift_is_half_beta_squared() {
        let spec = ProcessSpec::hindered_diffusion(5.42e-3, 0.0).unwrap();
        for s in [0.0, 0.01, 3.0] {
            assert!((spec.drift(s).unwrap() - 1.46882e-5).abs() < 1e-12);
        }
    }

    #[test]
    fn square_root_volatility() {
        let spec = ProcessSpec::krugman_local(0.0, 2.0, 1.0).unwrap();
        assert_eq!(spec.volatility(1.0).unwrap(), 0.0);
        assert!((spec.volatility(1.25).unwrap() - 1.0).abs() < 1e-15);
        let fixture = ProcessSpec::krugman_local(0.0, 5.42e-3, 0.0).unwrap();
        assert!((fixture.volatility(1.0).unwrap() - 5.42e-3).abs() < 1e-18);
    }

    #[test]
    fn below_barrier_is_a_domain_error() {
        let spec = ProcessSpec::krugman_local(0.0, 1.0, 1.0).unwrap();
        assert!(matches!(spec.drift(0.5), Err(Error::BelowBarrier { .. })));
        assert!(matches!(spec.volatility(0.5), Err(Error::BelowBarrier { .. })));
        let gbm = ProcessSpec::gbm(0.0, 1.0).unwrap();
        assert!(gbm.drift(-100.0).is_ok());
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(ProcessSpec::physical_potential(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(ProcessSpec::physical_potential(1.0, -1.0, 1.0, 0.0).is_err());
        assert!(ProcessSpec::krugman_local(0.0, 0.0, 0.0).is_err());
        assert!(ProcessSpec::hindered_diffusion(-1.0, 0.0).is_err());
        assert!(ProcessSpec::gbm(0.0, -1.0).is_err());
        assert!(ProcessSpec::new(Model::HinderedDiffusion { beta: 1.0 }, None).is_err());
    }
}
