//! Historical OHLC ingestion from local CSV exports.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime};
use thiserror::Error;

use crate::engine::PricePipettes;
use crate::ohlc::{BarsFile, OhlcBar, OhlcError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("no data rows")]
    NoDataRows,
    #[error("header mismatch: column {missing:?} not found in [{found}]")]
    HeaderMismatch { missing: String, found: String },
    #[error("line {line}: cannot parse timestamp {value:?}")]
    BadTimestamp { line: u64, value: String },
    #[error("line {line}: timestamp {current} does not follow {previous}")]
    NonMonotoneTimestamp { line: u64, previous: String, current: String },
    #[error("line {line}: cannot parse {column} price {value:?}")]
    PriceParse { line: u64, column: &'static str, value: String },
    #[error("line {line}: OHLC ordering violated (open {open}, high {high}, low {low}, close {close})")]
    OhlcViolation {
        line: u64,
        open: PricePipettes,
        high: PricePipettes,
        low: PricePipettes,
        close: PricePipettes,
    },
    #[error("line {line}: missing field {column}")]
    ShortRow { line: u64, column: &'static str },
    #[error("batch length and count must be positive")]
    EmptyBatchRequest,
    #[error("{count} batches of {batch_len} need {required} rows, only {available} available (at most {max_batches} batches)")]
    InsufficientRows {
        batch_len: usize,
        count: usize,
        required: usize,
        available: usize,
        max_batches: usize,
    },
    #[error("unknown format {0:?} (expected canonical, titlecase, or custom:TIME,OPEN,HIGH,LOW,CLOSE)")]
    UnknownFormat(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Which columns hold the timestamp and the four prices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvFormat {
    pub name: String,
    pub time: String,
    pub open: String,
    pub high: String,
    pub low: String,
    pub close: String,
    /// chrono format for timestamps; `None` accepts the common ISO-8601 shapes.
    pub time_format: Option<String>,
}

impl CsvFormat {
    /// `time,open,high,low,close`
    pub fn canonical() -> Self {
        CsvFormat::with_columns("canonical", ["time", "open", "high", "low", "close"])
    }

    /// `Date,Open,High,Low,Close`, the capitalized layout most chart sites export.
    pub fn titlecase() -> Self {
        CsvFormat::with_columns("titlecase", ["Date", "Open", "High", "Low", "Close"])
    }

    pub fn with_columns(name: &str, [time, open, high, low, close]: [&str; 5]) -> Self {
        CsvFormat {
            name: name.to_string(),
            time: time.to_string(),
            open: open.to_string(),
            high: high.to_string(),
            low: low.to_string(),
            close: close.to_string(),
            time_format: None,
        }
    }

    pub fn with_time_format(mut self, format: impl Into<String>) -> Self {
        self.time_format = Some(format.into());
        self
    }
}

impl Default for CsvFormat {
    fn default() -> Self {
        CsvFormat::canonical()
    }
}

impl FromStr for CsvFormat {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "canonical" => Ok(CsvFormat::canonical()),
            "titlecase" => Ok(CsvFormat::titlecase()),
            _ => {
                let cols: Vec<&str> = s
                    .strip_prefix("custom:")
                    .ok_or_else(|| IngestError::UnknownFormat(s.to_string()))?
                    .split(',')
                    .map(str::trim)
                    .collect();
                match cols.as_slice() {
                    &[t, o, h, l, c] if cols.iter().all(|c| !c.is_empty()) => {
                        Ok(CsvFormat::with_columns(s, [t, o, h, l, c]))
                    }
                    _ => Err(IngestError::UnknownFormat(s.to_string())),
                }
            }
        }
    }
}

impl fmt::Display for CsvFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// One parsed row of a historical file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealBarRow {
    pub timestamp: String,
    pub open: PricePipettes,
    pub high: PricePipettes,
    pub low: PricePipettes,
    pub close: PricePipettes,
}

impl RealBarRow {
    pub fn to_bar(&self, index: usize) -> Result<OhlcBar, OhlcError> {
        OhlcBar::new(index, self.open, self.high, self.low, self.close)
    }
}

const ISO_SHAPES: [&str; 5] = [
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
    "%Y-%m-%dT%H:%M:%S%.f",
];

fn parse_timestamp(value: &str, format: Option<&str>) -> Option<NaiveDateTime> {
    match format {
        Some(f) => NaiveDateTime::parse_from_str(value, f).ok(),
        None => ISO_SHAPES
            .iter()
            .find_map(|f| NaiveDateTime::parse_from_str(value, f).ok())
            .or_else(|| DateTime::parse_from_rfc3339(value).ok().map(|t| t.naive_utc())),
    }
}

/// Parses an exported OHLC file. Quotes with fewer than five decimals are
/// right-padded; rows must be ordered by strictly increasing time.
pub fn parse_ohlc_csv<R: Read>(input: R, format: &CsvFormat) -> Result<Vec<RealBarRow>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let locate = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| IngestError::HeaderMismatch {
            missing: name.to_string(),
            found: headers.iter().collect::<Vec<_>>().join(","),
        })
    };
    let cols = [
        locate(&format.time)?,
        locate(&format.open)?,
        locate(&format.high)?,
        locate(&format.low)?,
        locate(&format.close)?,
    ];
    const NAMES: [&str; 5] = ["time", "open", "high", "low", "close"];

    let mut rows = Vec::new();
    let mut previous: Option<(NaiveDateTime, String)> = None;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |k: usize| {
            record
                .get(cols[k])
                .filter(|v| !v.is_empty())
                .ok_or(IngestError::ShortRow { line, column: NAMES[k] })
        };
        let price = |k: usize| -> Result<PricePipettes, IngestError> {
            let raw = field(k)?;
            raw.parse().map_err(|_| IngestError::PriceParse { line, column: NAMES[k], value: raw.to_string() })
        };

        let timestamp = field(0)?.to_string();
        let when = parse_timestamp(&timestamp, format.time_format.as_deref())
            .ok_or_else(|| IngestError::BadTimestamp { line, value: timestamp.clone() })?;
        if let Some((prev_when, prev_raw)) = &previous {
            if when <= *prev_when {
                return Err(IngestError::NonMonotoneTimestamp {
                    line,
                    previous: prev_raw.clone(),
                    current: timestamp,
                });
            }
        }

        let row = RealBarRow { timestamp, open: price(1)?, high: price(2)?, low: price(3)?, close: price(4)? };
        if row.low > row.open.min(row.close) || row.high < row.open.max(row.close) {
            return Err(IngestError::OhlcViolation {
                line,
                open: row.open,
                high: row.high,
                low: row.low,
                close: row.close,
            });
        }
        previous = Some((when, row.timestamp.clone()));
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(IngestError::NoDataRows);
    }
    Ok(rows)
}

/// Writes rows back out in the canonical layout.
pub fn write_ohlc_csv<W: Write>(out: W, rows: &[RealBarRow]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "open", "high", "low", "close"])?;
    for row in rows {
        w.write_record([
            row.timestamp.clone(),
            row.open.to_string(),
            row.high.to_string(),
            row.low.to_string(),
            row.close.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Converts rows to bars numbered from 1 in file order, plus their timestamps.
pub fn rows_to_bars(rows: &[RealBarRow]) -> BarsFile {
    let bars = rows
        .iter()
        .enumerate()
        .map(|(i, r)| r.to_bar(i + 1).expect("parsed rows satisfy OHLC ordering"))
        .collect();
    BarsFile { bars, times: Some(rows.iter().map(|r| r.timestamp.clone()).collect()) }
}

/// A run of consecutive source intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    /// 1-based.
    pub batch_no: usize,
    pub bars: Vec<OhlcBar>,
    /// Source timestamps, parallel to `bars`, when known.
    pub timestamps: Vec<String>,
}

impl Batch {
    pub fn from_bars_file(batch_no: usize, file: BarsFile) -> Self {
        Batch { batch_no, bars: file.bars, timestamps: file.times.unwrap_or_default() }
    }

    pub fn to_bars_file(&self) -> BarsFile {
        BarsFile {
            bars: self.bars.clone(),
            times: (!self.timestamps.is_empty()).then(|| self.timestamps.clone()),
        }
    }
}

/// Splits the start of `rows` into `count` disjoint batches of `batch_len` rows.
/// Bars keep their source position as the interval number.
pub fn extract_batches(rows: &[RealBarRow], batch_len: usize, count: usize) -> Result<Vec<Batch>, IngestError> {
    if batch_len == 0 || count == 0 {
        return Err(IngestError::EmptyBatchRequest);
    }
    let required = batch_len.saturating_mul(count);
    if rows.len() < required {
        return Err(IngestError::InsufficientRows {
            batch_len,
            count,
            required,
            available: rows.len(),
            max_batches: rows.len() / batch_len,
        });
    }
    let file = rows_to_bars(&rows[..required]);
    let times = file.times.unwrap_or_default();
    Ok(file
        .bars
        .chunks_exact(batch_len)
        .zip(times.chunks_exact(batch_len))
        .enumerate()
        .map(|(k, (bars, ts))| Batch { batch_no: k + 1, bars: bars.to_vec(), timestamps: ts.to_vec() })
        .collect())
}
