#[path = "support/pasting.rs"]
mod pasting;

use proptest::prelude::*;
use targetzone_core::km::{estimate_pooled, BinConfig};
use targetzone_core::krugman::KrugmanParams;
use targetzone_core::simulate::{simulate, SimConfig};
use targetzone_core::ProcessSpec;

fn arb_params() -> impl Strategy<Value = KrugmanParams> {
    (-1.0f64..1.0, 0.1f64..10.0, 0.01f64..1.0, -1.0f64..1.0)
        .prop_map(|(m, gamma, sigma, barrier)| KrugmanParams::solve(m, gamma, sigma, barrier).unwrap())
}

#[test]
fn unit_example_against_oracle() {
    let p = KrugmanParams::solve(0.0, 2.0, 1.0, 0.0).unwrap();
    let (v, log_a) = pasting::solve_pasting_numerically(0.0, 1.0, 0.0).unwrap();
    assert!((v + 1.0).abs() < 1e-12 && (p.v_floor - v).abs() < 1e-12);
    assert!((log_a + 1.0).abs() < 1e-12 && (p.log_a - log_a).abs() < 1e-12);
    assert!((p.s_of_v(0.0) - 0.367_879_441_171_442_3).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pasting_conditions_hold(p in arb_params()) {
        let (r0, r1) = p.pasting_residuals();
        prop_assert!(r0.abs() < 1e-10 && r1.abs() < 1e-10, "{r0} {r1}");
        prop_assert_eq!(p.ds_dv(p.v_floor), 0.0);
        let (v, log_a) = pasting::solve_pasting_numerically(p.m, p.rho, p.barrier).unwrap();
        prop_assert!((v - p.v_floor).abs() < 1e-9 * (1.0 + v.abs()));
        // relative agreement of A is absolute agreement of ln A
        prop_assert!((log_a - p.log_a).abs() < 1e-9);
    }

    #[test]
    fn curve_is_increasing_and_above_free_float(p in arb_params()) {
        let span = 8.0 / p.rho;
        let curve = p.curve(p.v_floor, p.v_floor + span, 400).unwrap();
        prop_assert!(curve.windows(2).all(|w| w[1].s > w[0].s));
        prop_assert!(curve.iter().all(|c| c.s >= c.free_float));
    }

    #[test]
    fn inverse_round_trips(p in arb_params()) {
        let span = 20.0 / p.rho;
        for i in 0..100 {
            let v = p.v_floor + span * f64::from(i) / 99.0;
            let s = p.s_of_v(v);
            let back = p.v_of_s(s).unwrap();
            prop_assert!((back - v).abs() < 1e-9 * (1.0 + v.abs()), "{v} -> {s} -> {back}");
            prop_assert!((p.s_of_v(back) - s).abs() < 1e-10);
        }
    }

    #[test]
    fn local_ratio_is_one_half(gamma in 1e-3f64..1e4, sigma in 1e-4f64..10.0) {
        let e = KrugmanParams::solve(0.0, gamma, sigma, 0.0).unwrap().local_expansion();
        prop_assert!((e.ratio() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn far_from_the_barrier_v_follows_s() {
    let p = KrugmanParams::solve(0.2, 1.0, 0.5, 0.1).unwrap();
    let v = p.v_of_s(p.barrier + 200.0 / p.rho).unwrap();
    assert!((v - (p.barrier + 200.0 / p.rho - p.m)).abs() < 1e-10);
    let (f, g) = p.drift_vol_in_v(v).unwrap();
    assert!(f < 1e-60 && (g - p.sigma).abs() < 1e-15);
}

#[test]
fn local_volatility_near_the_barrier() {
    // relative error of β√gap is about √(2ρ·gap)/3, so ρ·gap must stay below ~5·10⁻⁴
    let sigma = 0.05;
    let rho = 0.005;
    let gamma = 2.0 / (rho * rho * sigma * sigma);
    let p = KrugmanParams::solve(0.0, gamma, sigma, 0.18).unwrap();
    let e = p.local_expansion();
    for i in 1..=50 {
        let gap = 0.001 * f64::from(i);
        let (f, g) = p.drift_vol_in_s(p.barrier + gap).unwrap();
        let local = e.beta * gap.sqrt();
        assert!(((g - local) / local).abs() < 0.01, "gap {gap}: {g} vs {local}");
        assert!(f <= e.alpha && f > 0.9 * e.alpha);
    }
}

#[test]
fn simulated_local_model_matches_exact_coefficients() {
    let beta = 5.42e-3;
    let rho: f64 = 0.1;
    let sigma = beta / (2.0 * rho).sqrt();
    let gamma = 2.0 / (rho * rho * sigma * sigma);
    let p = KrugmanParams::solve(0.0, gamma, sigma, 0.18).unwrap();
    let e = p.local_expansion();
    assert!((e.beta - beta).abs() < 1e-15);

    let spec = ProcessSpec::krugman_local(e.alpha, e.beta, p.barrier).unwrap();
    let paths = simulate(&spec, &SimConfig::new(2500, 31, p.barrier).with_paths(400)).unwrap();
    let est = estimate_pooled(&paths, &BinConfig::with_bins(30)).unwrap();
    let mut checked = 0;
    for b in est.bins.iter().filter(|b| b.count >= 2000) {
        let (_, g) = p.drift_vol_in_s(b.s_mid).unwrap();
        // χ² error of ĝ plus the spread of √gap across the bin
        let width = (est.bins[1].s_mid - est.bins[0].s_mid) / (b.s_mid - p.barrier);
        let tol = 4.0 * (0.5 / b.count as f64).sqrt() + 0.5 * width + 0.02;
        assert!((b.g_hat / g - 1.0).abs() < tol, "{b:?} vs {g}");
        checked += 1;
    }
    assert!(checked >= 10);
}
