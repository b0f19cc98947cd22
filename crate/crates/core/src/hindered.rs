//! Brownian particle near a wall: Einstein–Stokes bulk diffusion, the Lorentz
//! correction `λ = 1 + (9/8) R / (s − s̲)`, the bridge `g = √(2D)` and the
//! noise-induced Itô drift `g g'`.
//!
//! Physical quantities here are SI (meters, seconds, joules). Nothing in this module
//! converts them to exchange-rate units.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleEnv {
    /// `k_B T` in joules.
    pub thermal_energy: f64,
    /// Dynamic viscosity, Pa·s.
    pub viscosity: f64,
    /// Particle radius, m.
    pub radius: f64,
    /// Wall position, m.
    pub wall: f64,
}

impl ParticleEnv {
    pub fn new(thermal_energy: f64, viscosity: f64, radius: f64, wall: f64) -> Result<Self> {
        require_positive("thermal_energy", thermal_energy)?;
        require_positive("viscosity", viscosity)?;
        require_positive("radius", radius)?;
        if !wall.is_finite() {
            return Err(Error::param("wall", "must be finite"));
        }
        Ok(Self {
            thermal_energy,
            viscosity,
            radius,
            wall,
        })
    }

    pub fn at_temperature(kelvin: f64, viscosity: f64, radius: f64, wall: f64) -> Result<Self> {
        require_positive("temperature", kelvin)?;
        Self::new(BOLTZMANN * kelvin, viscosity, radius, wall)
    }

    /// `D₀ = k_B T / (6 π ν R)`, m²/s.
    pub fn bulk_diffusion(&self) -> f64 {
        self.thermal_energy / (6.0 * core::f64::consts::PI * self.viscosity * self.radius)
    }

    /// Lorentz's drag factor at position `s`.
    pub fn lorentz_lambda(&self, s: f64) -> Result<f64> {
        let gap = self.gap(s)?;
        Ok(1.0 + 9.0 / 8.0 * self.radius / gap)
    }

    /// `D(s) = D₀ / λ(s)`.
    pub fn wall_diffusion(&self, s: f64) -> Result<f64> {
        Ok(self.bulk_diffusion() / self.lorentz_lambda(s)?)
    }

    /// First-order near-wall form `(8 D₀ / 9R) (s − s̲)`.
    pub fn linear_wall_diffusion(&self, s: f64) -> Result<f64> {
        let gap = self.gap(s)?;
        Ok(8.0 * self.bulk_diffusion() / (9.0 * self.radius) * gap)
    }

    fn gap(&self, s: f64) -> Result<f64> {
        let gap = s - self.wall;
        if gap > 0.0 {
            Ok(gap)
        } else {
            Err(Error::Domain(alloc::format!(
                "position {s} is not above the wall {} (the drag diverges at contact)",
                self.wall
            )))
        }
    }
}

/// `D(s)/D₀` in Lorentz's approximation at a dimensionless gap `(s − s̲)/R`.
pub fn relative_diffusion(gap_over_radius: f64) -> Result<f64> {
    require_positive("gap/R", gap_over_radius)?;
    Ok(1.0 / (1.0 + 9.0 / (8.0 * gap_over_radius)))
}

/// `g = √(2D)`.
pub fn volatility_from_diffusion(diffusion: f64) -> Result<f64> {
    if diffusion.is_finite() && diffusion >= 0.0 {
        Ok((2.0 * diffusion).sqrt())
    } else {
        Err(Error::Domain(alloc::format!(
            "diffusion coefficient must be finite and >= 0, got {diffusion}"
        )))
    }
}

/// Behaviour of the drift `β² γ s^{2γ−1}` as a particle with `g = β s^γ` reaches the wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum DriftRegime {
    /// `γ < 1/2`: repelled with unbounded force, the wall is never touched.
    DivergentDrift,
    /// `γ = 1/2`: constant drift; the value is `β²/2`, recorded per unit `β²`.
    ConstantDrift { drift_per_beta_sq: f64 },
    /// `γ > 1/2`: the drift vanishes and a particle at the wall stays there.
    VanishingDrift,
}

/// Exponents within this distance of 1/2 count as the square-root case.
pub const EXPONENT_TOLERANCE: f64 = 1e-12;

pub fn classify_exponent(gamma: f64) -> Result<DriftRegime> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Domain(alloc::format!(
            "volatility exponent must be > 0, got {gamma}"
        )));
    }
    Ok(if (gamma - 0.5).abs() <= EXPONENT_TOLERANCE {
        DriftRegime::ConstantDrift {
            drift_per_beta_sq: 0.5,
        }
    } else if gamma < 0.5 {
        DriftRegime::DivergentDrift
    } else {
        DriftRegime::VanishingDrift
    })
}

/// Volatility profiles with closed-form `g g'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum VolatilityProfile {
    Constant { g: f64 },
    /// `β √(s − s̲)`
    SquareRoot { beta: f64, wall: f64 },
    /// `β (s − s̲)^γ`
    PowerLaw { beta: f64, exponent: f64, wall: f64 },
}

impl VolatilityProfile {
    pub fn volatility(&self, s: f64) -> Result<f64> {
        match *self {
            VolatilityProfile::Constant { g } => Ok(g),
            VolatilityProfile::SquareRoot { beta, wall } => Ok(beta * wall_gap(s, wall)?.sqrt()),
            VolatilityProfile::PowerLaw { beta, exponent, wall } => {
                Ok(beta * wall_gap(s, wall)?.powf(exponent))
            }
        }
    }

    /// `g(s) g'(s)` in closed form. At the wall the square-root profile returns its
    /// limit `β²/2`; a power law returns its limit or fails if that limit diverges.
    pub fn noise_induced_drift(&self, s: f64) -> Result<f64> {
        match *self {
            VolatilityProfile::Constant { .. } => Ok(0.0),
            VolatilityProfile::SquareRoot { beta, wall } => {
                wall_gap(s, wall)?;
                Ok(0.5 * beta * beta)
            }
            VolatilityProfile::PowerLaw { beta, exponent, wall } => {
                let gap = wall_gap(s, wall)?;
                let regime = classify_exponent(exponent)?;
                if gap == 0.0 {
                    return match regime {
                        DriftRegime::DivergentDrift => Err(Error::Domain(
                            "noise-induced drift diverges at the wall for exponents below 1/2".into(),
                        )),
                        DriftRegime::ConstantDrift { drift_per_beta_sq } => Ok(drift_per_beta_sq * beta * beta),
                        DriftRegime::VanishingDrift => Ok(0.0),
                    };
                }
                Ok(beta * beta * exponent * gap.powf(2.0 * exponent - 1.0))
            }
        }
    }
}

fn wall_gap(s: f64, wall: f64) -> Result<f64> {
    let gap = s - wall;
    if gap >= 0.0 {
        Ok(gap)
    } else {
        Err(Error::BelowBarrier {
            what: "s",
            value: s,
            barrier: wall,
        })
    }
}

/// `g(s) g'(s)` for an arbitrary profile, with `g'` from a central difference of step
/// `1e-6 · scale`. Fails when the stencil would reach below `wall`, where `g` of a
/// wall-bounded profile is undefined.
pub fn numerical_noise_drift<G: Fn(f64) -> f64>(g: G, s: f64, scale: f64, wall: Option<f64>) -> Result<f64> {
    require_positive("scale", scale)?;
    let h = 1e-6 * scale;
    if let Some(w) = wall {
        if s - h <= w {
            return Err(Error::Domain(alloc::format!(
                "s = {s} is within the difference step of the wall {w}; the derivative may diverge there"
            )));
        }
    }
    let slope = (g(s + h) - g(s - h)) / (2.0 * h);
    let value = g(s) * slope;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(alloc::format!("non-finite noise-induced drift at s = {s}")))
    }
}
