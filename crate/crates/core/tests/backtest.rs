use proptest::prelude::*;
use targetzone_core::backtest::{run_strategy, StrategyConfig};
use targetzone_core::simulate::{simulate_path, SimConfig};
use targetzone_core::{ProcessSpec, TimeSeries};

fn arb_path() -> impl Strategy<Value = TimeSeries> {
    prop::collection::vec(-1e-3f64..1e-3, 2..300).prop_map(|steps| {
        let mut s = 0.18;
        let mut values = vec![s];
        for d in steps {
            s += d;
            values.push(s);
        }
        TimeSeries::from_values(1.0, values).unwrap()
    })
}

proptest! {
    #[test]
    fn costs_only_reduce_net_pnl(ts in arb_path(), c1 in 0.0f64..5.0, c2 in 0.0f64..5.0) {
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let a = run_strategy(&ts, &StrategyConfig::new(0.18, lo)).unwrap();
        let b = run_strategy(&ts, &StrategyConfig::new(0.18, hi)).unwrap();
        prop_assert!(b.net_pnl <= a.net_pnl);
        prop_assert_eq!(a.gross_pnl, b.gross_pnl);
        prop_assert_eq!(a.n_trades, b.n_trades);
    }

    #[test]
    fn accounting_identity(ts in arb_path(), cost in 0.0f64..5.0, size in 0.1f64..10.0) {
        let cfg = StrategyConfig { s_eq: 0.18, cost_pips: cost, position_size: size };
        let r = run_strategy(&ts, &cfg).unwrap();
        prop_assert_eq!(r.net_pnl, r.gross_pnl - r.total_costs);
        if cost > 0.0 && r.n_trades > 0 {
            prop_assert!(r.net_pnl < r.gross_pnl);
        }
        let steps: f64 = r.step_returns().sum();
        prop_assert!((steps - r.net_pnl).abs() < 1e-12);
        if let Some(sharpe) = r.sharpe {
            prop_assert!(sharpe.is_finite());
        }
    }
}

#[test]
fn constant_series_at_threshold() {
    let ts = TimeSeries::from_values(1.0 / 360.0, vec![0.18; 100]).unwrap();
    let r = run_strategy(&ts, &StrategyConfig::new(0.18, 1.5)).unwrap();
    assert_eq!((r.n_trades, r.net_pnl), (0, 0.0));
    assert!(r.sharpe.is_none());
}

#[test]
fn martingale_has_no_sharpe() {
    let spec = ProcessSpec::gbm(0.0, 5e-4).unwrap();
    let within = (0..100)
        .filter(|&seed| {
            let cfg = SimConfig::new(2 * 8760, seed, 0.18).with_tau(1.0);
            let ts = simulate_path(&spec, &cfg, 0).unwrap();
            let r = run_strategy(&ts, &StrategyConfig::new(0.18, 0.0)).unwrap();
            r.sharpe.unwrap().abs() < 2.0
        })
        .count();
    assert!(within >= 95, "{within}/100");
}
