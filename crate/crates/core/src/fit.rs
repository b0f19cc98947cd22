//! Fitting the local target-zone model `f(s) = α`, `g(s) = β √(s − s̲)` and testing
//! the square-root exponent against `g(s) = β (s − s̲)^μ`.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_non_negative, require_positive, Error, Result};
use crate::km::KmEstimate;
use crate::series::TimeSeries;
use crate::stats::{chi2_1_survival, golden_section_max};

/// Value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimate {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Unweighted,
    /// Each bin weighted by its sample count.
    CountWeighted,
}

/// One-parameter least squares of `ĝ` against `√(s − s̲)` through the origin.
pub fn fit_volatility(est: &KmEstimate, barrier: f64, weighting: Weighting) -> Result<ParamEstimate> {
    require_finite("barrier", barrier)?;
    if est.bins.len() < 2 {
        return Err(Error::InsufficientData(alloc::format!(
            "volatility fit needs >= 2 bins, got {}",
            est.bins.len()
        )));
    }
    if let Some(b) = est.bins.iter().find(|b| b.s_mid <= barrier) {
        return Err(Error::Domain(alloc::format!(
            "bin midpoint {} is not above the barrier {barrier}",
            b.s_mid
        )));
    }
    let weight = |count: usize| match weighting {
        Weighting::Unweighted => 1.0,
        Weighting::CountWeighted => count as f64,
    };
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for b in &est.bins {
        let w = weight(b.count);
        let x = (b.s_mid - barrier).sqrt();
        sxy += w * x * b.g_hat;
        sxx += w * x * x;
    }
    let beta = sxy / sxx;
    let rss: f64 = est
        .bins
        .iter()
        .map(|b| {
            let r = b.g_hat - beta * (b.s_mid - barrier).sqrt();
            weight(b.count) * r * r
        })
        .sum();
    let dof = (est.bins.len() - 1) as f64;
    Ok(ParamEstimate {
        value: beta,
        se: (rss / dof / sxx).sqrt(),
    })
}

/// Count-weighted mean of `f̂` across bins with a heteroskedasticity-robust standard error.
pub fn fit_drift(est: &KmEstimate) -> Result<ParamEstimate> {
    let k = est.bins.len();
    if k < 2 {
        return Err(Error::InsufficientData(alloc::format!(
            "drift fit needs >= 2 bins, got {k}"
        )));
    }
    let total: f64 = est.bins.iter().map(|b| b.count as f64).sum();
    let alpha = est.bins.iter().map(|b| b.count as f64 * b.f_hat).sum::<f64>() / total;
    let spread: f64 = est
        .bins
        .iter()
        .map(|b| {
            let d = b.count as f64 * (b.f_hat - alpha);
            d * d
        })
        .sum();
    let se = (spread * k as f64 / (k - 1) as f64).sqrt() / total;
    Ok(ParamEstimate { value: alpha, se })
}

/// `√α / β` with its delta-method error and distance from the no-arbitrage value 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioTest {
    pub ratio: f64,
    pub se: f64,
    /// `(ratio − 1/2) / se`; absent when `se` is zero.
    pub z_score: Option<f64>,
}

pub fn ratio_test(alpha: ParamEstimate, beta: ParamEstimate) -> Option<RatioTest> {
    if !(alpha.value > 0.0) || !(beta.value > 0.0) {
        return None;
    }
    let ratio = alpha.value.sqrt() / beta.value;
    let rel_alpha = alpha.se / (2.0 * alpha.value);
    let rel_beta = beta.se / beta.value;
    let se = ratio * (rel_alpha * rel_alpha + rel_beta * rel_beta).sqrt();
    let z_score = (se > 0.0).then(|| (ratio - 0.5) / se);
    Some(RatioTest { ratio, se, z_score })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub beta_hat: f64,
    pub beta_se: f64,
    pub alpha_hat: f64,
    pub alpha_se: f64,
    /// `None` (serialized as `null`) when `alpha_hat <= 0`.
    pub ratio: Option<f64>,
    pub ratio_se: Option<f64>,
    pub z_score: Option<f64>,
    pub barrier: f64,
}

impl FitReport {
    pub fn beta(&self) -> ParamEstimate {
        ParamEstimate {
            value: self.beta_hat,
            se: self.beta_se,
        }
    }

    pub fn alpha(&self) -> ParamEstimate {
        ParamEstimate {
            value: self.alpha_hat,
            se: self.alpha_se,
        }
    }

    pub fn ratio_test(&self) -> Option<RatioTest> {
        ratio_test(self.alpha(), self.beta())
    }
}

/// Drift and volatility fits plus the ratio test, in one report.
pub fn fit_krugman(est: &KmEstimate, barrier: f64, weighting: Weighting) -> Result<FitReport> {
    let beta = fit_volatility(est, barrier, weighting)?;
    let alpha = fit_drift(est)?;
    let ratio = ratio_test(alpha, beta);
    Ok(FitReport {
        beta_hat: beta.value,
        beta_se: beta.se,
        alpha_hat: alpha.value,
        alpha_se: alpha.se,
        ratio: ratio.map(|r| r.ratio),
        ratio_se: ratio.map(|r| r.se),
        z_score: ratio.and_then(|r| r.z_score),
        barrier,
    })
}

/// Settings for the exponent likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrConfig {
    /// Search interval for the free exponent.
    pub mu_bounds: (f64, f64),
    /// Width of the final golden-section bracket.
    pub tolerance: f64,
    /// Gaps below this many log-units are raised to it.
    pub gap_floor: f64,
    /// Increments starting closer than this to the barrier are left out. Near the
    /// barrier a discretely sampled path is reflected within a step and its
    /// increments are far from Gaussian.
    pub min_gap: f64,
    /// Coarse grid points used to bracket the global maximum.
    pub grid: usize,
    /// Exponent under the null hypothesis.
    pub mu_null: f64,
}

impl Default for LrConfig {
    fn default() -> Self {
        Self {
            mu_bounds: (0.05, 3.0),
            tolerance: 1e-6,
            gap_floor: 1e-8,
            min_gap: 1e-5,
            grid: 60,
            mu_null: 0.5,
        }
    }
}

impl LrConfig {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.mu_bounds;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::param("mu_bounds", "needs finite lo < hi"));
        }
        require_positive("tolerance", self.tolerance)?;
        require_positive("gap_floor", self.gap_floor)?;
        require_non_negative("min_gap", self.min_gap)?;
        require_finite("mu_null", self.mu_null)?;
        if self.grid < 3 {
            return Err(Error::param("grid", "must be >= 3"));
        }
        Ok(())
    }
}

/// Increments prepared for the Gaussian likelihood
/// `Δs_i ~ N(α τ, β² (s_i − s̲)^{2μ} τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Increments {
    log_gap: Vec<f64>,
    delta: Vec<f64>,
    tau: f64,
    sum_log_gap: f64,
}

/// Profile likelihood at a fixed exponent, with `α` and `β` at their conditional MLEs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub log_likelihood: f64,
}

impl Increments {
    /// Collects increments from independent series; `usable`, when given, must hold one
    /// mask per series (see [`crate::km::estimate_masked`]).
    pub fn from_series(
        series: &[TimeSeries],
        barrier: f64,
        cfg: &LrConfig,
        usable: Option<&[Vec<bool>]>,
    ) -> Result<Self> {
        require_finite("barrier", barrier)?;
        cfg.validate()?;
        let first = series
            .first()
            .ok_or_else(|| Error::InsufficientData("no series supplied".into()))?;
        let tau = first.tau();
        if let Some(masks) = usable {
            if masks.len() != series.len() {
                return Err(Error::Domain("one increment mask per series is required".into()));
            }
        }
        let mut log_gap = Vec::new();
        let mut delta = Vec::new();
        for (j, s) in series.iter().enumerate() {
            if (s.tau() - tau).abs() > 1e-12 * tau {
                return Err(Error::Domain("pooled series must share tau".into()));
            }
            let v = s.values();
            if let Some(&low) = v.iter().find(|&&x| x < barrier) {
                return Err(Error::BelowBarrier {
                    what: "sample",
                    value: low,
                    barrier,
                });
            }
            let mask = usable.map(|m| &m[j]);
            if let Some(m) = mask {
                if m.len() + 1 != v.len() {
                    return Err(Error::Domain("increment mask length mismatch".into()));
                }
            }
            for i in 0..v.len().saturating_sub(1) {
                let gap = v[i] - barrier;
                if mask.is_some_and(|m| !m[i]) || gap < cfg.min_gap {
                    continue;
                }
                log_gap.push(gap.max(cfg.gap_floor).ln());
                delta.push(v[i + 1] - v[i]);
            }
        }
        if delta.len() < 100 {
            return Err(Error::InsufficientData(alloc::format!(
                "likelihood test needs >= 100 increments, got {}",
                delta.len()
            )));
        }
        let d0 = delta[0];
        if delta.iter().all(|&d| d == d0) {
            return Err(Error::DegenerateLikelihood(
                "all increments are identical; the variance is zero".into(),
            ));
        }
        let sum_log_gap = log_gap.iter().sum();
        Ok(Self {
            log_gap,
            delta,
            tau,
            sum_log_gap,
        })
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn profile(&self, mu: f64) -> Result<ProfilePoint> {
        let n = self.delta.len() as f64;
        let (mut sw, mut swd) = (0.0, 0.0);
        for (&lg, &d) in self.log_gap.iter().zip(&self.delta) {
            let w = (-2.0 * mu * lg).exp();
            sw += w;
            swd += w * d;
        }
        let mean = swd / sw;
        let rss: f64 = self
            .log_gap
            .iter()
            .zip(&self.delta)
            .map(|(&lg, &d)| {
                let r = d - mean;
                (-2.0 * mu * lg).exp() * r * r
            })
            .sum();
        let var_scale = rss / n; // β² τ
        if !(var_scale > 0.0) || !var_scale.is_finite() {
            return Err(Error::DegenerateLikelihood(alloc::format!(
                "weighted residual variance is {var_scale} at mu = {mu}"
            )));
        }
        let log_likelihood = -0.5 * n * ((2.0 * core::f64::consts::PI).ln() + 1.0 + var_scale.ln())
            - mu * self.sum_log_gap;
        Ok(ProfilePoint {
            mu,
            alpha: mean / self.tau,
            beta: (var_scale / self.tau).sqrt(),
            log_likelihood,
        })
    }
}

/// Maximum-likelihood exponent of `g(s) = β (s − s̲)^μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub mu_hat: f64,
    /// From the observed information of the profile likelihood; absent at a search
    /// bound or where the profile is not concave.
    pub mu_se: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub log_likelihood: f64,
}

pub fn fit_exponent(inc: &Increments, cfg: &LrConfig) -> Result<ExponentFit> {
    cfg.validate()?;
    let (lo, hi) = cfg.mu_bounds;
    let eval = |mu: f64| inc.profile(mu).map(|p| p.log_likelihood);

    let step = (hi - lo) / (cfg.grid - 1) as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..cfg.grid {
        let ll = eval(lo + i as f64 * step)?;
        if ll > best.1 {
            best = (i, ll);
        }
    }
    let a = lo + best.0.saturating_sub(1) as f64 * step;
    let b = (lo + (best.0 + 1) as f64 * step).min(hi);
    let mu_hat = golden_section_max(|mu| eval(mu).unwrap_or(f64::NEG_INFINITY), a, b, cfg.tolerance);
    let mut point = inc.profile(mu_hat)?;
    let grid_best = inc.profile(lo + best.0 as f64 * step)?;
    if grid_best.log_likelihood > point.log_likelihood {
        point = grid_best;
    }

    let h = 1e-3;
    let mu_se = if point.mu - h >= lo && point.mu + h <= hi {
        let curv = (eval(point.mu + h)? - 2.0 * point.log_likelihood + eval(point.mu - h)?) / (h * h);
        (curv < 0.0).then(|| (-1.0 / curv).sqrt())
    } else {
        None
    };
    Ok(ExponentFit {
        mu_hat: point.mu,
        mu_se,
        alpha: point.alpha,
        beta: point.beta,
        log_likelihood: point.log_likelihood,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrTestReport {
    pub mu_hat: f64,
    pub mu_se: Option<f64>,
    /// `β` under the free exponent.
    pub beta_free: f64,
    /// `β` with `μ` fixed at the null value.
    pub beta_null: f64,
    pub alpha_free: f64,
    pub alpha_null: f64,
    pub log_likelihood_free: f64,
    pub log_likelihood_null: f64,
    pub lr_statistic: f64,
    pub p_value: f64,
    pub n_increments: usize,
}

impl LrTestReport {
    pub fn rejects_at(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Likelihood-ratio test of `μ = mu_null` against a free exponent (Wilks, one dof).
pub fn lr_test_increments(inc: &Increments, cfg: &LrConfig) -> Result<LrTestReport> {
    let free = fit_exponent(inc, cfg)?;
    let null = inc.profile(cfg.mu_null)?;
    // the nested null is admissible for the free model whenever it lies in the bounds
    let (lo, hi) = cfg.mu_bounds;
    let free = if (lo..=hi).contains(&cfg.mu_null) && null.log_likelihood > free.log_likelihood {
        ExponentFit {
            mu_hat: null.mu,
            mu_se: free.mu_se,
            alpha: null.alpha,
            beta: null.beta,
            log_likelihood: null.log_likelihood,
        }
    } else {
        free
    };
    let lr_statistic = 2.0 * (free.log_likelihood - null.log_likelihood);
    Ok(LrTestReport {
        mu_hat: free.mu_hat,
        mu_se: free.mu_se,
        beta_free: free.beta,
        beta_null: null.beta,
        alpha_free: free.alpha,
        alpha_null: null.alpha,
        log_likelihood_free: free.log_likelihood,
        log_likelihood_null: null.log_likelihood,
        lr_statistic,
        p_value: chi2_1_survival(lr_statistic),
        n_increments: inc.len(),
    })
}

pub fn lr_test(series: &TimeSeries, barrier: f64, cfg: &LrConfig) -> Result<LrTestReport> {
    let inc = Increments::from_series(core::slice::from_ref(series), barrier, cfg, None)?;
    lr_test_increments(&inc, cfg)
}
