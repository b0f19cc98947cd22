//! CSV and JSON formats shared by the library and the command line.
//!
//! | file | header |
//! |---|---|
//! | time series | `t,s` (`t` in fractional hours or ISO-8601 UTC) |
//! | KM estimate | `s_mid,f_hat,g_hat,count` |
//! | trade log | `t,s,position,step_return` |
//! | Krugman curve | `v,s,free_float` |
//! | diffusion profile | `gap_over_radius,d_over_d0,linear_d_over_d0` |
//! | observed slots | `t,observed` |

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use targetzone_core::km::{KmBin, KmEstimate};
use targetzone_core::series::MICROS_PER_HOUR;
use targetzone_core::TimeSeries;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TimeFormat {
    /// Hours since the epoch (zero for unanchored simulations).
    #[default]
    Hours,
    /// ISO-8601 UTC with microseconds.
    Iso,
}

/// Relative paths are taken from the data directory when one is set.
pub fn resolve(data_dir: Option<&Path>, path: &Path) -> PathBuf {
    match data_dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

pub fn format_iso(us: i64) -> Result<String> {
    let dt = DateTime::<Utc>::from_timestamp_micros(us)
        .ok_or_else(|| CliError::Data(format!("timestamp {us} µs is out of range")))?;
    Ok(dt.format("%Y-%m-%dT%H:%M:%S%.6fZ").to_string())
}

/// Microseconds since the epoch. Accepts RFC 3339 and offset-free forms read as UTC.
pub fn parse_iso(text: &str) -> Option<i64> {
    let text = text.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
        return Some(dt.timestamp_micros());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(text, fmt) {
            return Some(naive.and_utc().timestamp_micros());
        }
    }
    None
}

fn open_writer(path: &Path) -> Result<csv::Writer<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn expect_header(reader: &mut csv::Reader<File>, path: &Path, expected: &[&str]) -> Result<()> {
    let header = reader.headers()?;
    if !header.iter().eq(expected.iter().copied()) {
        return Err(CliError::Data(format!(
            "{}: expected header `{}`, found `{}`",
            path.display(),
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = open_writer(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = open_reader(path)?;
    let mut out = Vec::new();
    for (i, row) in r.deserialize().enumerate() {
        out.push(row.map_err(|e| CliError::Data(format!("{} row {}: {e}", path.display(), i + 2)))?);
    }
    Ok(out)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn write_series(path: &Path, series: &TimeSeries, format: TimeFormat) -> Result<()> {
    let mut w = open_writer(path)?;
    w.write_record(["t", "s"])?;
    let t0_hours = series.t0_us() as f64 / MICROS_PER_HOUR;
    for (i, s) in series.values().iter().enumerate() {
        let t = match format {
            TimeFormat::Hours => (t0_hours + series.elapsed_hours(i)).to_string(),
            TimeFormat::Iso => format_iso(series.timestamp_us(i))?,
        };
        w.write_record([t, s.to_string()])?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Reads a `t,s` file; the step is inferred from the time column and spacing must be
/// uniform to one part in 10⁶.
pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let mut r = open_reader(path)?;
    expect_header(&mut r, path, &["t", "s"])?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut format = None;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |what: &str| CliError::Data(format!("{} line {line}: {what}", path.display()));
        if rec.len() != 2 {
            return Err(bad("expected two fields"));
        }
        let fmt = *format.get_or_insert(if rec[0].parse::<f64>().is_ok() {
            TimeFormat::Hours
        } else {
            TimeFormat::Iso
        });
        let t = match fmt {
            TimeFormat::Hours => rec[0].parse::<f64>().map_err(|_| bad("bad hour value"))?,
            TimeFormat::Iso => parse_iso(&rec[0]).ok_or_else(|| bad("bad timestamp"))? as f64,
        };
        times.push(t);
        values.push(rec[1].parse::<f64>().map_err(|_| bad("bad value"))?);
    }
    if times.len() < 2 {
        return Err(CliError::Data(format!(
            "{}: at least two samples are needed to infer the step",
            path.display()
        )));
    }
    let n = times.len();
    let step = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(step > 0.0) {
        return Err(CliError::Data(format!("{}: time must increase", path.display())));
    }
    if let Some(k) = times.windows(2).position(|w| ((w[1] - w[0]) - step).abs() > 1e-6 * step) {
        return Err(CliError::Data(format!(
            "{}: non-uniform spacing between lines {} and {}",
            path.display(),
            k + 2,
            k + 3
        )));
    }
    let (t0_us, tau) = match format {
        Some(TimeFormat::Iso) => (times[0] as i64, step / MICROS_PER_HOUR),
        _ => ((times[0] * MICROS_PER_HOUR).round() as i64, step),
    };
    TimeSeries::new(t0_us, tau, values).map_err(|e| CliError::from(e).context(path.display()))
}

pub fn write_km(path: &Path, est: &KmEstimate) -> Result<()> {
    write_csv(path, &est.bins)
}

/// The file carries no step or assignment count: `tau` is supplied and `assigned` is
/// the sum of the reported counts.
pub fn read_km(path: &Path, tau: f64) -> Result<KmEstimate> {
    let mut r = open_reader(path)?;
    expect_header(&mut r, path, &["s_mid", "f_hat", "g_hat", "count"])?;
    drop(r);
    let bins: Vec<KmBin> = read_csv(path)?;
    if bins.is_empty() {
        return Err(CliError::Data(format!("{}: no bins", path.display())));
    }
    if !bins.windows(2).all(|w| w[0].s_mid < w[1].s_mid) {
        return Err(CliError::Data(format!("{}: midpoints must increase", path.display())));
    }
    let assigned = bins.iter().map(|b| b.count).sum();
    Ok(KmEstimate { bins, tau, assigned })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub gap_over_radius: f64,
    pub d_over_d0: f64,
    pub linear_d_over_d0: f64,
}

#[derive(Serialize, Deserialize)]
struct ObservedRow {
    t: String,
    observed: u8,
}

pub fn write_observed(path: &Path, series: &TimeSeries, observed: &[bool]) -> Result<()> {
    let rows = observed
        .iter()
        .enumerate()
        .map(|(i, &o)| {
            Ok(ObservedRow {
                t: format_iso(series.timestamp_us(i))?,
                observed: u8::from(o),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(path, rows)
}

pub fn read_observed(path: &Path) -> Result<Vec<bool>> {
    let rows: Vec<ObservedRow> = read_csv(path)?;
    rows.iter()
        .map(|r| match r.observed {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(CliError::Data(format!("{}: observed flag {v} is not 0 or 1", path.display()))),
        })
        .collect()
}
