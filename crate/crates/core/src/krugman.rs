//! Krugman's target-zone solution `s = m + v + A e^{−ρ v}`, `ρ = √(2 / (γ σ²))`.
//!
//! Smooth pasting at the floor fixes both constants:
//!
//! ```text
//! v̲ = s̲ − m − 1/ρ,        A = e^{ρ (s̲ − m) − 1} / ρ
//! ```
//!
//! Internally everything is written in the offset `δ = v − v̲`, where
//! `A e^{−ρ v} = e^{−ρ δ} / ρ`; this keeps `A` (which overflows for steep zones) out of
//! the arithmetic.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrugmanParams {
    pub m: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub barrier: f64,
    pub rho: f64,
    /// `ln A`.
    pub log_a: f64,
    /// Pasting point `v̲`.
    pub v_floor: f64,
}

/// Local model coefficients: `f(s) = α`, `g(s) = β √(s − s̲)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalExpansion {
    pub alpha: f64,
    pub beta: f64,
}

impl LocalExpansion {
    /// `√α / β`, which equals 1/2 for every (σ, γ).
    pub fn ratio(&self) -> f64 {
        self.alpha.sqrt() / self.beta
    }
}

/// One point of the `s(v)` curve next to the free-float line `m + v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub v: f64,
    pub s: f64,
    pub free_float: f64,
}

impl KrugmanParams {
    /// Solves the smooth-pasting conditions in closed form.
    pub fn solve(m: f64, gamma: f64, sigma: f64, barrier: f64) -> Result<Self> {
        require_finite("m", m)?;
        require_positive("gamma", gamma)?;
        require_positive("sigma", sigma)?;
        require_finite("barrier", barrier)?;
        let rho = (2.0 / (gamma * sigma * sigma)).sqrt();
        require_positive("rho", rho)?;
        let v_floor = barrier - m - 1.0 / rho;
        let log_a = rho * (barrier - m) - 1.0 - rho.ln();
        Ok(Self {
            m,
            gamma,
            sigma,
            barrier,
            rho,
            log_a,
            v_floor,
        })
    }

    /// The pasting constant `A`; may be infinite for very steep zones, see `log_a`.
    pub fn pasting_constant(&self) -> f64 {
        self.log_a.exp()
    }

    /// `s(v)`; below the pasting point the money supply holds `s` at the floor.
    pub fn s_of_v(&self, v: f64) -> f64 {
        let d = v - self.v_floor;
        if d <= 0.0 {
            return self.barrier;
        }
        self.barrier + d + (-self.rho * d).exp_m1() / self.rho
    }

    /// `ds/dv = 1 − A ρ e^{−ρ v}` (zero below the pasting point).
    pub fn ds_dv(&self, v: f64) -> f64 {
        let d = v - self.v_floor;
        if d <= 0.0 {
            return 0.0;
        }
        -(-self.rho * d).exp_m1()
    }

    /// Residuals of the pasting equations evaluated with the literal
    /// `m + v + A e^{−ρ v}` form: `(s(v̲) − s̲, s'(v̲))`.
    pub fn pasting_residuals(&self) -> (f64, f64) {
        let tail = (self.log_a - self.rho * self.v_floor).exp(); // A e^{−ρ v̲}
        (
            self.m + self.v_floor + tail - self.barrier,
            1.0 - self.rho * tail,
        )
    }

    /// `v(s)`, the inverse of [`s_of_v`](Self::s_of_v) on `[v̲, ∞)`.
    pub fn v_of_s(&self, s: f64) -> Result<f64> {
        require_finite("s", s)?;
        if s < self.barrier {
            return Err(Error::BelowBarrier {
                what: "s",
                value: s,
                barrier: self.barrier,
            });
        }
        let gap = s - self.barrier;
        if gap == 0.0 {
            return Ok(self.v_floor);
        }
        let rho = self.rho;
        // h(δ) = δ + expm1(−ρδ)/ρ − gap is increasing on δ > 0
        let h = |d: f64| d + (-rho * d).exp_m1() / rho - gap;
        let mut lo = 0.0;
        let mut hi = 1f64.max(10.0 / rho) + gap;
        let mut expansions = 0;
        while h(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
            expansions += 1;
            if expansions > 200 {
                return Err(Error::NoConvergence("could not bracket v(s)".into()));
            }
        }
        // both ρ δ² / 2 and δ bound h + gap from above, so the guess starts at or below the root
        let mut d = (2.0 * gap / rho).sqrt().max(gap).clamp(lo, hi);
        for _ in 0..200 {
            let val = h(d);
            if val == 0.0 {
                break;
            }
            if val < 0.0 {
                lo = d;
            } else {
                hi = d;
            }
            let slope = -(-rho * d).exp_m1();
            let newton = d - val / slope;
            let next = if slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            let converged = (next - d).abs() <= 1e-12 * d.max(1.0) || hi - lo <= 1e-15 * hi.max(1.0);
            d = next;
            if converged {
                break;
            }
        }
        Ok(self.v_floor + d)
    }

    /// Drift `f(v) = ½ A σ² ρ² e^{−ρv}` and volatility `g(v) = σ − σ A ρ e^{−ρv}`.
    pub fn drift_vol_in_v(&self, v: f64) -> Result<(f64, f64)> {
        let d = v - self.v_floor;
        if d < 0.0 {
            return Err(Error::Domain(alloc::format!(
                "v = {v} lies below the pasting point {}",
                self.v_floor
            )));
        }
        let decay = (-self.rho * d).exp(); // A ρ e^{−ρ v}
        let drift = 0.5 * self.sigma * self.sigma * self.rho * decay;
        let vol = -self.sigma * (-self.rho * d).exp_m1();
        Ok((drift, vol))
    }

    /// Drift and volatility as functions of the observable rate.
    pub fn drift_vol_in_s(&self, s: f64) -> Result<(f64, f64)> {
        self.drift_vol_in_v(self.v_of_s(s)?)
    }

    /// `α = σ / √(2γ)`, `β = 2^{3/4} √σ / γ^{1/4}`.
    pub fn local_expansion(&self) -> LocalExpansion {
        LocalExpansion {
            alpha: self.sigma / (2.0 * self.gamma).sqrt(),
            beta: 2f64.powf(0.75) * self.sigma.sqrt() / self.gamma.powf(0.25),
        }
    }

    /// `n` evenly spaced points of `s(v)` on `[v_from, v_to]`.
    pub fn curve(&self, v_from: f64, v_to: f64, n: usize) -> Result<Vec<CurvePoint>> {
        require_finite("v_from", v_from)?;
        require_finite("v_to", v_to)?;
        if n < 2 || v_to <= v_from {
            return Err(Error::param("curve", "needs n >= 2 and v_from < v_to"));
        }
        let step = (v_to - v_from) / (n - 1) as f64;
        Ok((0..n)
            .map(|i| {
                let v = v_from + i as f64 * step;
                CurvePoint {
                    v,
                    s: self.s_of_v(v),
                    free_float: self.m + v,
                }
            })
            .collect())
    }
}
