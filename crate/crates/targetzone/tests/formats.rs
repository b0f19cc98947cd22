use std::fs;
use std::path::Path;

use proptest::prelude::*;
use targetzone::config::{merge, Config};
use targetzone::io::{self, read_series, write_series, TimeFormat};
use targetzone::ticks::{load_ticks, TickFormat};
use targetzone::CliError;
use targetzone_core::km::{estimate, BinConfig};
use targetzone_core::TimeSeries;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hour_series_round_trip(values in prop::collection::vec(-2.0f64..2.0, 2..200), tau in 1e-4f64..10.0) {
        let dir = tempfile::tempdir().unwrap();
        let ts = TimeSeries::from_values(tau, values).unwrap();
        let p = dir.path().join("s.csv");
        write_series(&p, &ts, TimeFormat::Hours).unwrap();
        let back = read_series(&p).unwrap();
        prop_assert_eq!(back.values(), ts.values());
        prop_assert!((back.tau() - tau).abs() <= 1e-12 * tau);
        prop_assert_eq!(back.t0_us(), 0);
    }

    #[test]
    fn iso_series_round_trip(values in prop::collection::vec(0.0f64..1.0, 2..100), slot in 0i64..10_000_000, secs in 1i64..600) {
        let dir = tempfile::tempdir().unwrap();
        let w = secs * 1_000_000;
        let ts = TimeSeries::new(slot * w, w as f64 / 3.6e9, values).unwrap();
        let p = dir.path().join("s.csv");
        write_series(&p, &ts, TimeFormat::Iso).unwrap();
        prop_assert_eq!(read_series(&p).unwrap(), ts);
    }
}

#[test]
fn km_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<f64> = (0..2000).map(|i| (i as f64 * 0.37).sin() * 0.01 + 0.2).collect();
    let est = estimate(&TimeSeries::from_values(1.0 / 360.0, values).unwrap(), &BinConfig::with_bins(20)).unwrap();
    let p = dir.path().join("km.csv");
    io::write_km(&p, &est).unwrap();
    let back = io::read_km(&p, est.tau).unwrap();
    assert_eq!(back.bins, est.bins);
    let header = fs::read_to_string(&p).unwrap();
    assert!(header.starts_with("s_mid,f_hat,g_hat,count\n"));
}

#[test]
fn malformed_series_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad_header = write(dir.path(), "a.csv", "time,value\n0,1\n1,2\n");
    assert!(matches!(read_series(&bad_header), Err(CliError::Data(_))));
    let uneven = write(dir.path(), "b.csv", "t,s\n0,1\n1,2\n3,2\n");
    assert!(read_series(&uneven).unwrap_err().to_string().contains("non-uniform"));
    let single = write(dir.path(), "c.csv", "t,s\n0,1\n");
    assert!(read_series(&single).is_err());
    let nan = write(dir.path(), "d.csv", "t,s\n0,1\n1,NaN\n");
    assert!(read_series(&nan).is_err());
}

#[test]
fn price_ticks_with_iso_times() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "t.csv",
        "timestamp,price\n2011-09-06T10:00:07Z,1.2010\n2011-09-06T10:00:01.5Z,1.2000\n2011-09-06 10:00:03,1.2020\n",
    );
    let load = load_ticks(&p, &TickFormat::default()).unwrap();
    assert_eq!((load.rows, load.malformed), (3, 0));
    let times: Vec<i64> = load.ticks.iter().map(|t| t.timestamp_us).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(times[0] % 1_000_000, 500_000);
    assert_eq!(load.ticks[0].price, 1.2);
}

#[test]
fn quote_ticks_with_epoch_millis() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "q.csv", "epoch_ms,bid,ask\n1315303200000,1.2000,1.2004\n1315303200250,1.2002,1.2006\n");
    let load = load_ticks(&p, &TickFormat::default()).unwrap();
    assert_eq!(load.ticks[0].timestamp_us, 1_315_303_200_000_000);
    assert_eq!(load.ticks[1].timestamp_us, 1_315_303_200_250_000);
    assert!((load.ticks[0].price - 1.2002).abs() < 1e-15);
    assert_eq!(load.ticks[0].quote, Some((1.2, 1.2004)));
}

#[test]
fn malformed_rows_are_counted_up_to_one_percent() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = String::from("timestamp,price\n");
    for i in 0..200 {
        if i == 50 {
            ok.push_str("oops,1.2\n");
        } else {
            ok.push_str(&format!("{},{}\n", 1_000 * i, 1.2));
        }
    }
    let p = write(dir.path(), "ok.csv", &ok);
    let load = load_ticks(&p, &TickFormat::default()).unwrap();
    assert_eq!((load.rows, load.malformed, load.ticks.len()), (200, 1, 199));
    assert_eq!(load.samples, vec!["line 52: oops,1.2".to_string()]);

    let mut bad = String::from("timestamp,bid,ask\n");
    for i in 0..100 {
        match i {
            10 => bad.push_str("1000,1.3,1.2\n"),
            20 => bad.push_str("2000,-1,1.2\n"),
            _ => bad.push_str(&format!("{},1.2,1.2001\n", 1_000 * i)),
        }
    }
    let p = write(dir.path(), "bad.csv", &bad);
    let err = load_ticks(&p, &TickFormat::default()).unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, CliError::Data(_)));
    assert!(msg.contains("2 of 100") && msg.contains("line 12: 1000,1.3,1.2"), "{msg}");
}

#[test]
fn unknown_tick_header_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    for text in ["when,price\n0,1\n", "timestamp,open,high,low\n0,1,1,1\n", ""] {
        let p = write(dir.path(), "h.csv", text);
        assert!(load_ticks(&p, &TickFormat::default()).is_err(), "{text:?}");
    }
}

#[derive(serde::Serialize)]
struct Flags {
    bins: Option<usize>,
    min_count: Option<usize>,
    out: Option<String>,
}

#[derive(serde::Deserialize, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
struct Params {
    bins: usize,
    min_count: usize,
    #[serde(default)]
    subsample: usize,
}

#[test]
fn flags_override_config() {
    let cfg = Config::parse("threads = 2\n[estimate]\nbins = 20\nmin_count = 5\nout = \"from-config\"\n").unwrap();
    assert_eq!(cfg.threads(), Some(2));
    let flags = Flags {
        bins: Some(30),
        min_count: None,
        out: None,
    };
    let (p, out): (Params, _) = merge(cfg.section("estimate"), &flags).unwrap();
    assert_eq!(p, Params { bins: 30, min_count: 5, subsample: 0 });
    assert_eq!(out.unwrap(), Path::new("from-config"));
}

#[test]
fn config_errors_are_usage_errors() {
    assert!(matches!(Config::parse("[estimat]\nbins = 3\n"), Err(CliError::Usage(_))));
    assert!(matches!(Config::parse("threads = 0\n"), Err(CliError::Usage(_))));
    assert!(matches!(Config::parse("not toml"), Err(CliError::Usage(_))));
    let cfg = Config::parse("[estimate]\nbinz = 3\n").unwrap();
    let flags = Flags {
        bins: Some(1),
        min_count: Some(2),
        out: None,
    };
    let err = merge::<Params>(cfg.section("estimate"), &flags).unwrap_err();
    assert!(matches!(err, CliError::Usage(ref m) if m.contains("binz")));
}
