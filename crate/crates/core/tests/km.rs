use proptest::prelude::*;
use targetzone_core::fit::{fit_volatility, Weighting};
use targetzone_core::km::{estimate, estimate_pooled, robustness_scan, BinConfig};
use targetzone_core::simulate::{simulate, simulate_path, SimConfig};
use targetzone_core::{eurchf_floor, ProcessSpec, TimeSeries};

fn arb_series() -> impl Strategy<Value = TimeSeries> {
    (prop::collection::vec(-1.0f64..1.0, 2..400), 1e-3f64..2.0)
        .prop_map(|(v, tau)| TimeSeries::from_values(tau, v).unwrap())
}

fn loose(n_bins: usize) -> BinConfig {
    BinConfig {
        n_bins,
        range: None,
        min_count: 2,
    }
}

proptest! {
    #[test]
    fn every_sample_but_the_last_is_binned(ts in arb_series(), k in 2usize..50) {
        if let Ok(est) = estimate(&ts, &loose(k)) {
            prop_assert_eq!(est.assigned, ts.len() - 1);
            prop_assert!(est.total_count() <= ts.len() - 1);
        }
        // two bins over at least four increments always report something
        if ts.len() >= 5 {
            let est = estimate(&ts, &loose(2)).unwrap();
            prop_assert_eq!(est.assigned, ts.len() - 1);
        }
    }

    #[test]
    fn reported_bins_are_well_formed(ts in arb_series(), k in 2usize..50) {
        let cfg = loose(k);
        if let Ok(est) = estimate(&ts, &cfg) {
            let max_step = ts.increments().fold(0.0f64, |m, d| m.max(d.abs()));
            prop_assert!(est.bins.windows(2).all(|w| w[0].s_mid < w[1].s_mid));
            for b in &est.bins {
                prop_assert!(b.g_hat >= 0.0);
                prop_assert!(b.count >= cfg.min_count);
                prop_assert!(b.f_hat.abs() * est.tau <= max_step * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn shifting_the_series_shifts_only_the_midpoints(ts in arb_series(), c in -5.0f64..5.0, k in 2usize..40) {
        let cfg = loose(k);
        let (Ok(a), Ok(b)) = (estimate(&ts, &cfg), estimate(&ts.shifted(c).unwrap(), &cfg)) else {
            return Ok(());
        };
        prop_assert_eq!(a.bins.len(), b.bins.len());
        for (x, y) in a.bins.iter().zip(&b.bins) {
            prop_assert_eq!(x.count, y.count);
            prop_assert!((y.s_mid - x.s_mid - c).abs() < 1e-9);
            prop_assert!((x.f_hat - y.f_hat).abs() <= 1e-9 * (1.0 + x.f_hat.abs()) / ts.tau());
            prop_assert!((x.g_hat - y.g_hat).abs() <= 1e-6 * (1.0 + x.g_hat));
        }
    }
}

#[test]
fn constant_series_has_zero_estimates() {
    let ts = TimeSeries::from_values(1.0 / 360.0, vec![0.18; 500]).unwrap();
    let est = estimate(&ts, &BinConfig::default()).unwrap();
    assert!(est.bins.iter().all(|b| b.f_hat == 0.0 && b.g_hat == 0.0));
}

#[test]
fn too_short_or_too_sparse() {
    let one = TimeSeries::from_values(1.0, vec![0.0]).unwrap();
    assert!(estimate(&one, &BinConfig::default()).is_err());
    let short = TimeSeries::from_values(1.0, (0..20).map(f64::from).collect()).unwrap();
    assert!(estimate(&short, &BinConfig::default()).is_err());
}

#[test]
fn gbm_volatility_in_every_bin() {
    let sigma = 2e-3;
    let spec = ProcessSpec::gbm(0.0, sigma).unwrap();
    let ts = simulate_path(&spec, &SimConfig::new(400_000, 1, 0.2), 0).unwrap();
    let est = estimate(&ts, &BinConfig::with_bins(20)).unwrap();
    for b in &est.bins {
        // ĝ²/σ² is a χ²(n)/n variable; 4.5 standard deviations of √(2/n) bound it
        let band = 4.5 * (2.0 / b.count as f64).sqrt();
        assert!(((b.g_hat * b.g_hat) / (sigma * sigma) - 1.0).abs() < band, "{b:?}");
    }
}

#[test]
fn estimates_converge_with_length() {
    let sigma = 3e-3;
    let spec = ProcessSpec::gbm(0.0, sigma).unwrap();
    let err = |n: usize| -> f64 {
        let mut total = 0.0;
        for seed in 0..8 {
            let ts = simulate_path(&spec, &SimConfig::new(n, seed, 0.0), 0).unwrap();
            let cfg = BinConfig {
                n_bins: 5,
                range: None,
                min_count: 10,
            };
            let est = estimate(&ts, &cfg).unwrap();
            let w: f64 = est.bins.iter().map(|b| b.count as f64).sum();
            total += est
                .bins
                .iter()
                .map(|b| b.count as f64 * ((b.g_hat - sigma) / sigma).powi(2))
                .sum::<f64>()
                / w;
        }
        (total / 8.0).sqrt()
    };
    let short = err(20_000);
    let long = err(320_000);
    // 16× the data: the RMS error should drop by about 4
    assert!(long < short / 2.5, "{short} -> {long}");
}

#[test]
fn subsampling_by_one_is_a_no_op() {
    let spec = ProcessSpec::gbm(0.0, 1e-3).unwrap();
    let ts = simulate_path(&spec, &SimConfig::new(10_000, 2, 0.0), 0).unwrap();
    let a = estimate(&ts, &BinConfig::default()).unwrap();
    let b = estimate(&ts.subsample(1).unwrap(), &BinConfig::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn gbm_volatility_is_stable_under_subsampling() {
    let sigma = 1e-3;
    let spec = ProcessSpec::gbm(0.0, sigma).unwrap();
    let ts = simulate_path(&spec, &SimConfig::new(300_000, 4, 0.0), 0).unwrap();
    for m in [1, 2, 3] {
        let thin = ts.subsample(m).unwrap();
        let est = estimate(&thin, &BinConfig::with_bins(10)).unwrap();
        let n: f64 = est.bins.iter().map(|b| b.count as f64).sum();
        let g2 = est.bins.iter().map(|b| b.count as f64 * b.g_hat * b.g_hat).sum::<f64>() / n;
        let band = 4.0 * (2.0 / n).sqrt();
        assert!((g2 / (sigma * sigma) - 1.0).abs() < band, "m = {m}: {}", g2.sqrt());
    }
}

#[test]
fn krugman_round_trip_and_bin_robustness() {
    let beta = 5.42e-3;
    let b = eurchf_floor();
    let spec = ProcessSpec::krugman_local(beta * beta / 4.0, beta, b).unwrap();
    let paths = simulate(&spec, &SimConfig::new(2500, 11, b).with_paths(400)).unwrap();
    let est = estimate_pooled(&paths, &BinConfig::with_bins(100)).unwrap();
    let fit = fit_volatility(&est, b, Weighting::Unweighted).unwrap();
    assert!((fit.value / beta - 1.0).abs() < 0.05, "{fit:?}");
    let scan = robustness_scan(&paths, &[20, 100, 140], &[1], b, &BinConfig::default(), Weighting::Unweighted).unwrap();
    assert!(scan.relative_spread < 0.10, "{scan:?}");
    assert_eq!(scan.rows.len(), 3);
}
