//! Tick files: `timestamp,price` or `timestamp,bid,ask`.
//!
//! The timestamp column is ISO-8601 or epoch milliseconds. Header names ending in
//! `_ms` (or `epoch_ms`, `millis`) select milliseconds and `iso`/`datetime` select
//! ISO; a plain `timestamp` or `time` column is decided from its first parseable row.

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};
use targetzone_core::coarse::TickRecord;

use crate::error::{CliError, Result};
use crate::io::parse_iso;

/// Largest tolerated share of malformed data rows.
pub const MAX_MALFORMED_FRACTION: f64 = 0.01;
const SAMPLE_LINES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    #[default]
    Auto,
    Price,
    Quote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TickTime {
    #[default]
    Auto,
    Iso,
    EpochMs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TickFormat {
    pub layout: Layout,
    pub time: TickTime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickLoad {
    /// Valid records sorted by time (stable for equal timestamps).
    pub ticks: Vec<TickRecord>,
    pub rows: usize,
    pub malformed: usize,
    /// Up to five `line N: content` samples of rejected rows.
    pub samples: Vec<String>,
}

fn detect(header: &csv::StringRecord, format: &TickFormat) -> std::result::Result<(Layout, TickTime), String> {
    let names: Vec<String> = header.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    let forced = format.layout;
    let layout = match names.len() {
        2 if forced != Layout::Quote
            && (forced == Layout::Price || matches!(names[1].as_str(), "price" | "mid" | "rate")) =>
        {
            Layout::Price
        }
        3 if forced != Layout::Price && (forced == Layout::Quote || (names[1] == "bid" && names[2] == "ask")) => {
            Layout::Quote
        }
        _ => {
            return Err(format!(
                "unrecognized header `{}`; expected `timestamp,price` or `timestamp,bid,ask`",
                names.join(",")
            ))
        }
    };
    let time = match (format.time, names[0].as_str()) {
        (TickTime::Auto, "epoch_ms" | "millis" | "timestamp_ms" | "time_ms") => TickTime::EpochMs,
        (TickTime::Auto, "iso" | "datetime") => TickTime::Iso,
        (TickTime::Auto, "timestamp" | "time") => TickTime::Auto,
        (TickTime::Auto, other) => return Err(format!("unrecognized timestamp column `{other}`")),
        (explicit, _) => explicit,
    };
    Ok((layout, time))
}

fn parse_epoch_ms(text: &str) -> Option<i64> {
    if let Ok(ms) = text.parse::<i64>() {
        return ms.checked_mul(1000);
    }
    let ms: f64 = text.parse().ok()?;
    let us = (ms * 1000.0).round();
    (us.is_finite() && us.abs() < 9.0e18).then_some(us as i64)
}

fn parse_time(text: &str, time: &mut TickTime) -> Option<i64> {
    match *time {
        TickTime::EpochMs => parse_epoch_ms(text),
        TickTime::Iso => parse_iso(text),
        TickTime::Auto => {
            if let Some(us) = parse_epoch_ms(text) {
                *time = TickTime::EpochMs;
                Some(us)
            } else if let Some(us) = parse_iso(text) {
                *time = TickTime::Iso;
                Some(us)
            } else {
                None
            }
        }
    }
}

fn parse_row(rec: &csv::StringRecord, layout: Layout, time: &mut TickTime) -> Option<TickRecord> {
    let width = if layout == Layout::Quote { 3 } else { 2 };
    if rec.len() != width {
        return None;
    }
    let ts = parse_time(&rec[0], time)?;
    let num = |i: usize| rec[i].parse::<f64>().ok();
    match layout {
        Layout::Quote => TickRecord::from_quote(ts, num(1)?, num(2)?).ok(),
        _ => TickRecord::new(ts, num(1)?).ok(),
    }
}

pub fn load_ticks(path: &Path, format: &TickFormat) -> Result<TickLoad> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: unreadable header: {e}", path.display())))?
        .clone();
    let (layout, mut time) = detect(&header, format).map_err(|m| CliError::Data(format!("{}: {m}", path.display())))?;

    let mut ticks = Vec::new();
    let mut rows = 0usize;
    let mut malformed = 0usize;
    let mut samples = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let line = reader.position().line();
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                rows += 1;
                match parse_row(&record, layout, &mut time) {
                    Some(t) => ticks.push(t),
                    None => {
                        malformed += 1;
                        if samples.len() < SAMPLE_LINES {
                            samples.push(format!("line {line}: {}", record.iter().collect::<Vec<_>>().join(",")));
                        }
                    }
                }
            }
            Err(e) => {
                rows += 1;
                malformed += 1;
                if samples.len() < SAMPLE_LINES {
                    samples.push(format!("line {line}: {e}"));
                }
            }
        }
    }
    if rows > 0 && malformed as f64 > MAX_MALFORMED_FRACTION * rows as f64 {
        return Err(CliError::Data(format!(
            "{}: {malformed} of {rows} rows are malformed (more than 1%); e.g. {}",
            path.display(),
            samples.join(" | ")
        )));
    }
    ticks.sort_by_key(|t| t.timestamp_us);
    Ok(TickLoad {
        ticks,
        rows,
        malformed,
        samples,
    })
}
