//! Fixed-length OHLC resampling and open-relative deviation statistics.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::PricePipettes;

/// One hour of the Table-style series when prices arrive once per second.
pub const DEFAULT_INTERVAL_LEN: usize = 3600;

pub const BARS_HEADER: [&str; 7] =
    ["interval", "open", "high", "low", "close", "pos_dev_pipettes", "neg_dev_pipettes"];

#[derive(Debug, Error)]
pub enum OhlcError {
    #[error("interval length must be at least 1")]
    ZeroInterval,
    #[error("bar {index}: low {low} / high {high} do not bracket open {open} and close {close}")]
    InvalidBar {
        index: usize,
        open: PricePipettes,
        high: PricePipettes,
        low: PricePipettes,
        close: PricePipettes,
    },
    #[error("deviation split is undefined when every bar has zero deviation")]
    ZeroDeviation,
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OhlcBar {
    /// 1-based interval number.
    pub index: usize,
    pub open: PricePipettes,
    pub high: PricePipettes,
    pub low: PricePipettes,
    pub close: PricePipettes,
    /// high - open, in pipettes.
    pub pos_dev: u64,
    /// open - low, in pipettes.
    pub neg_dev: u64,
}

impl OhlcBar {
    /// Builds a bar, checking `low <= min(open, close) <= max(open, close) <= high`.
    pub fn new(
        index: usize,
        open: PricePipettes,
        high: PricePipettes,
        low: PricePipettes,
        close: PricePipettes,
    ) -> Result<Self, OhlcError> {
        if low > open.min(close) || high < open.max(close) {
            return Err(OhlcError::InvalidBar { index, open, high, low, close });
        }
        Ok(OhlcBar {
            index,
            open,
            high,
            low,
            close,
            pos_dev: (high.pipettes() - open.pipettes()) as u64,
            neg_dev: (open.pipettes() - low.pipettes()) as u64,
        })
    }

    fn from_cluster(index: usize, cluster: &[PricePipettes]) -> Self {
        let open = cluster[0];
        let close = cluster[cluster.len() - 1];
        let (low, high) = cluster
            .iter()
            .fold((open, open), |(lo, hi), &p| (lo.min(p), hi.max(p)));
        OhlcBar::new(index, open, high, low, close).expect("cluster extremes bracket its endpoints")
    }

    pub fn is_up(&self) -> bool {
        self.close >= self.open
    }
}

/// Cuts `prices` into consecutive clusters of `interval_len` and summarizes each.
/// A trailing partial cluster is dropped.
pub fn resample(prices: &[PricePipettes], interval_len: usize) -> Result<Vec<OhlcBar>, OhlcError> {
    if interval_len == 0 {
        return Err(OhlcError::ZeroInterval);
    }
    Ok(prices
        .chunks_exact(interval_len)
        .enumerate()
        .map(|(i, cluster)| OhlcBar::from_cluster(i + 1, cluster))
        .collect())
}

/// `(high - open, open - low)` in pipettes.
pub fn bar_deviations(bar: &OhlcBar) -> (u64, u64) {
    (
        (bar.high.pipettes() - bar.open.pipettes()) as u64,
        (bar.open.pipettes() - bar.low.pipettes()) as u64,
    )
}

/// Share of cumulative deviation above vs below the open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviationSplit {
    pub pct_pos: u8,
    pub pct_neg: u8,
    pub total_pos: u64,
    pub total_neg: u64,
}

impl DeviationSplit {
    /// Percentages use round-half-up on the positive side; the negative side is the rest.
    pub fn from_totals(total_pos: u64, total_neg: u64) -> Result<Self, OhlcError> {
        let total = u128::from(total_pos) + u128::from(total_neg);
        if total == 0 {
            return Err(OhlcError::ZeroDeviation);
        }
        let pct_pos = ((200 * u128::from(total_pos) + total) / (2 * total)) as u8;
        Ok(DeviationSplit { pct_pos, pct_neg: 100 - pct_pos, total_pos, total_neg })
    }
}

pub fn cumulative_split(bars: &[OhlcBar]) -> Result<DeviationSplit, OhlcError> {
    let (total_pos, total_neg) = bars.iter().fold((0u64, 0u64), |(p, n), bar| {
        let (pos, neg) = bar_deviations(bar);
        (p + pos, n + neg)
    });
    DeviationSplit::from_totals(total_pos, total_neg)
}

/// Writes the bars CSV. With `times`, a leading `time` column is added.
pub fn write_bars_csv<W: Write>(out: W, bars: &[OhlcBar], times: Option<&[String]>) -> Result<(), OhlcError> {
    let mut w = csv::Writer::from_writer(out);
    if times.is_some() {
        w.write_field("time")?;
    }
    w.write_record(BARS_HEADER)?;
    for (i, bar) in bars.iter().enumerate() {
        if let Some(times) = times {
            w.write_field(times.get(i).map(String::as_str).unwrap_or(""))?;
        }
        w.write_record([
            bar.index.to_string(),
            bar.open.to_string(),
            bar.high.to_string(),
            bar.low.to_string(),
            bar.close.to_string(),
            bar.pos_dev.to_string(),
            bar.neg_dev.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Bars read back from a bars CSV, with the `time` column when it was present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BarsFile {
    pub bars: Vec<OhlcBar>,
    pub times: Option<Vec<String>>,
}

/// Reads a bars CSV. Stored deviations must agree with the prices.
pub fn read_bars_csv<R: Read>(input: R) -> Result<BarsFile, OhlcError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    let with_time = headers.get(0) == Some("time");
    let offset = usize::from(with_time);
    if headers.iter().skip(offset).ne(BARS_HEADER) {
        return Err(OhlcError::Malformed {
            line: 1,
            message: format!("expected header [time,]{}", BARS_HEADER.join(",")),
        });
    }
    let mut bars = Vec::new();
    let mut times = with_time.then(Vec::new);
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| OhlcError::Malformed { line, message };
        let field = |i: usize| record.get(i + offset).ok_or_else(|| bad("short row".into()));
        let price = |i: usize| -> Result<PricePipettes, OhlcError> {
            let raw = field(i)?;
            raw.parse().map_err(|_| bad(format!("bad price {raw:?} in column {}", BARS_HEADER[i])))
        };
        let index: usize = field(0)?.parse().map_err(|_| bad("bad interval number".into()))?;
        let bar = OhlcBar::new(index, price(1)?, price(2)?, price(3)?, price(4)?)?;
        let pos: u64 = field(5)?.parse().map_err(|_| bad("bad pos_dev".into()))?;
        let neg: u64 = field(6)?.parse().map_err(|_| bad("bad neg_dev".into()))?;
        if (pos, neg) != (bar.pos_dev, bar.neg_dev) {
            return Err(bad(format!(
                "stored deviations ({pos}, {neg}) disagree with prices ({}, {})",
                bar.pos_dev, bar.neg_dev
            )));
        }
        if let Some(times) = times.as_mut() {
            times.push(record.get(0).unwrap_or("").to_string());
        }
        bars.push(bar);
    }
    Ok(BarsFile { bars, times })
}
