use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use targetzone_core::fit::*;
use targetzone_core::km::{KmBin, KmEstimate};
use targetzone_core::simulate::{simulate_path, SimConfig};
use targetzone_core::stats::chi2_1_survival;
use targetzone_core::{eurchf_floor, ProcessSpec, TimeSeries};

fn est(points: &[(f64, f64, f64, usize)], tau: f64) -> KmEstimate {
    KmEstimate {
        bins: points
            .iter()
            .map(|&(s_mid, f_hat, g_hat, count)| KmBin { s_mid, f_hat, g_hat, count })
            .collect(),
        tau,
        assigned: points.iter().map(|p| p.3).sum(),
    }
}

fn arb_estimate() -> impl Strategy<Value = KmEstimate> {
    prop::collection::vec((1e-4f64..0.1, -1e-3f64..1e-3, 1e-5f64..1e-2, 10usize..1000), 2..40).prop_map(|mut rows| {
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        rows.dedup_by(|a, b| a.0 == b.0);
        if rows.len() < 2 {
            rows.push((0.2, 0.0, 1e-3, 10));
        }
        est(&rows, 1.0 / 360.0)
    })
}

#[test]
fn hand_examples() {
    let two = est(&[(1.0, 0.0, 1.0, 10), (4.0, 0.0, 2.0, 10)], 1.0);
    let beta = fit_volatility(&two, 0.0, Weighting::Unweighted).unwrap();
    assert!((beta.value - 1.0).abs() < 1e-15);
    assert!(beta.se < 1e-15);

    let drift = fit_drift(&est(&[(1.0, 1.0, 0.0, 5), (2.0, 3.0, 0.0, 5)], 1.0)).unwrap();
    assert_eq!(drift.value, 2.0);
    let zero = fit_drift(&est(&[(1.0, 0.0, 0.0, 5), (2.0, 0.0, 0.0, 9)], 1.0)).unwrap();
    assert_eq!(zero.value, 0.0);

    assert!(fit_volatility(&est(&[(1.0, 0.0, 1.0, 10)], 1.0), 0.0, Weighting::Unweighted).is_err());
    assert!(fit_volatility(&two, 1.0, Weighting::Unweighted).is_err());
}

#[test]
fn noiseless_volatility_fit() {
    let b = 0.3;
    let beta0 = 7e-3;
    let rows: Vec<_> = (1..30)
        .map(|i| {
            let s = b + 0.001 * f64::from(i);
            (s, 0.0, beta0 * (s - b).sqrt(), 50)
        })
        .collect();
    for w in [Weighting::Unweighted, Weighting::CountWeighted] {
        let fit = fit_volatility(&est(&rows, 1.0), b, w).unwrap();
        assert!((fit.value / beta0 - 1.0).abs() < 1e-13);
        assert!(fit.se < 1e-12 * beta0);
    }
}

#[test]
fn ratio_from_published_fit() {
    let r = ratio_test(
        ParamEstimate { value: 1.40e-5, se: 0.8e-5 },
        ParamEstimate { value: 5.42e-3, se: 0.06e-3 },
    )
    .unwrap();
    assert!((r.ratio - 0.690).abs() < 5e-4, "{}", r.ratio);
    assert!((r.ratio - 0.68).abs() < r.se);
    assert!(r.z_score.unwrap().abs() < 1.0);

    let exact = ratio_test(
        ParamEstimate { value: 0.25, se: 0.0 },
        ParamEstimate { value: 1.0, se: 0.0 },
    )
    .unwrap();
    assert_eq!(exact.ratio, 0.5);
    assert_eq!(exact.se, 0.0);
    assert!(exact.z_score.is_none());

    assert!(ratio_test(ParamEstimate { value: -1e-6, se: 1e-6 }, ParamEstimate { value: 1.0, se: 0.0 }).is_none());
}

#[test]
fn report_without_positive_drift_has_no_ratio() {
    let rows = [(0.1, -1e-5, 1e-3, 20), (0.2, -2e-5, 1.4e-3, 20)];
    let report = fit_krugman(&est(&rows, 1.0), 0.0, Weighting::Unweighted).unwrap();
    assert!(report.ratio.is_none() && report.ratio_se.is_none());
    let json = serde_json::to_value(report).unwrap();
    for key in ["beta_hat", "beta_se", "alpha_hat", "alpha_se", "ratio", "ratio_se"] {
        assert!(json.get(key).is_some(), "{key}");
    }
}

proptest! {
    #[test]
    fn volatility_fit_scales_with_g(e in arb_estimate(), c in 1e-3f64..1e3) {
        let mut scaled = e.clone();
        for b in &mut scaled.bins {
            b.g_hat *= c;
        }
        let a = fit_volatility(&e, 0.0, Weighting::Unweighted).unwrap();
        let s = fit_volatility(&scaled, 0.0, Weighting::Unweighted).unwrap();
        prop_assert!((s.value - c * a.value).abs() <= 1e-12 * c * a.value);
        prop_assert!((s.se - c * a.se).abs() <= 1e-9 * c * (a.se + a.value));
    }

    #[test]
    fn ratio_is_invariant_under_time_rescaling(e in arb_estimate(), c in 1e-2f64..1e2) {
        let mut rescaled = e.clone();
        rescaled.tau *= c;
        for b in &mut rescaled.bins {
            b.f_hat /= c;
            b.g_hat /= c.sqrt();
        }
        let a = fit_krugman(&e, 0.0, Weighting::Unweighted).unwrap();
        let r = fit_krugman(&rescaled, 0.0, Weighting::Unweighted).unwrap();
        match (a.ratio, r.ratio) {
            (Some(x), Some(y)) => {
                prop_assert!((x - y).abs() <= 1e-9 * x);
                let (sx, sy) = (a.ratio_se.unwrap(), r.ratio_se.unwrap());
                prop_assert!((sx - sy).abs() <= 1e-8 * (sx + x));
            }
            (None, None) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn chi_square_survival_matches_statrs(x in 0.0f64..60.0) {
        let oracle = 1.0 - ChiSquared::new(1.0).unwrap().cdf(x);
        prop_assert!((chi2_1_survival(x) - oracle).abs() < 1e-12);
    }
}

fn krugman_series(seed: u64, steps: usize) -> (TimeSeries, f64) {
    let beta = 5.42e-3;
    let b = eurchf_floor();
    let spec = ProcessSpec::krugman_local(beta * beta / 4.0, beta, b).unwrap();
    (simulate_path(&spec, &SimConfig::new(steps, seed, b + 0.01), 0).unwrap(), b)
}

#[test]
fn likelihood_ratio_properties() {
    let cfg = LrConfig::default();
    for seed in 0..5 {
        let (ts, b) = krugman_series(seed, 20_000);
        let r = lr_test(&ts, b, &cfg).unwrap();
        assert!(r.lr_statistic >= -1e-6);
        assert!((0.0..=1.0).contains(&r.p_value));
        let inc = Increments::from_series(std::slice::from_ref(&ts), b, &cfg, None).unwrap();
        let at = inc.profile(r.mu_hat).unwrap().log_likelihood;
        assert!((at - r.log_likelihood_free).abs() < 1e-9 * at.abs());
        for d in [-1e-3, 1e-3] {
            assert!(inc.profile(r.mu_hat + d).unwrap().log_likelihood <= at + 1e-9 * at.abs());
        }
        let null = inc.profile(0.5).unwrap();
        assert_eq!(null.log_likelihood, r.log_likelihood_null);
        assert!((r.beta_null / 5.42e-3 - 1.0).abs() < 0.1);
    }
}

#[test]
fn likelihood_rejects_linear_volatility() {
    // g = 0.3·gap, simulated here by hand: no library model has a linear profile
    use rand::Rng;
    use rand_distr::StandardNormal;
    let b = 0.0;
    let tau: f64 = 1.0 / 360.0;
    let mut rng = targetzone_core::simulate::path_rng(5, 0);
    let mut s: f64 = 0.05;
    let mut values = vec![s];
    for _ in 0..20_000 {
        let z: f64 = rng.sample(StandardNormal);
        s += 0.3 * (s - b) * tau.sqrt() * z;
        values.push(s);
    }
    let ts = TimeSeries::from_values(tau, values).unwrap();
    let r = lr_test(&ts, b, &LrConfig::default()).unwrap();
    assert!(r.p_value < 0.05);
    assert!((r.mu_hat - 1.0).abs() < 0.1, "{}", r.mu_hat);
}

#[test]
fn degenerate_inputs() {
    let flat = TimeSeries::from_values(1.0, vec![0.5; 300]).unwrap();
    assert!(lr_test(&flat, 0.0, &LrConfig::default()).is_err());
    let short = TimeSeries::from_values(1.0, (0..50).map(|i| 1.0 + f64::from(i % 3)).collect()).unwrap();
    assert!(lr_test(&short, 0.0, &LrConfig::default()).is_err());
    let below = TimeSeries::from_values(1.0, vec![0.5, -0.1, 0.5]).unwrap();
    assert!(lr_test(&below, 0.0, &LrConfig::default()).is_err());
}
