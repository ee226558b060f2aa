//! Trade, price, and reward file formats.

use std::io::{Read, Write};

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::rewards::RewardReport;
use super::types::{PricePipettes, RiskAppetite, SimulationResult, TradeDirection, TradeRecord};
use super::EngineError;

pub const TRADES_HEADER: [&str; 5] = ["index", "trade_type", "risk_appetite", "open_price", "post_price"];
pub const PRICES_HEADER: [&str; 2] = ["index", "price"];

pub fn write_trades_csv<W: Write>(out: W, trades: &[TradeRecord]) -> Result<(), EngineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRADES_HEADER)?;
    for t in trades {
        w.write_record([
            t.index.to_string(),
            t.direction.code().to_string(),
            t.appetite.to_string(),
            t.open_price.to_string(),
            t.post_price.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_prices_csv<W: Write>(out: W, prices: &[PricePipettes]) -> Result<(), EngineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PRICES_HEADER)?;
    for (i, p) in prices.iter().enumerate() {
        w.write_record([i.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an `index,price` file; indices must run 0, 1, 2, ...
pub fn read_prices_csv<R: Read>(input: R) -> Result<Vec<PricePipettes>, EngineError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().ne(PRICES_HEADER) {
        return Err(EngineError::Malformed { line: 1, message: format!("expected header {}", PRICES_HEADER.join(",")) });
    }
    let mut prices = Vec::new();
    for record in r.records() {
        let record = record?;
        let index: usize = record.get(0).unwrap_or("").parse().map_err(|e| malformed(&record, e))?;
        if index != prices.len() {
            return Err(malformed(&record, format!("expected index {}, found {index}", prices.len())));
        }
        let price = record.get(1).unwrap_or("").parse().map_err(|e| malformed(&record, e))?;
        prices.push(price);
    }
    Ok(prices)
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, EngineError> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| EngineError::Malformed {
        line: 1,
        message: format!("missing column {name:?}"),
    })
}

fn malformed(record: &csv::StringRecord, e: impl std::fmt::Display) -> EngineError {
    EngineError::Malformed {
        line: record.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

/// Reads a replay script: any CSV with `trade_type` and `risk_appetite` columns.
/// A trades file written by [`write_trades_csv`] qualifies.
pub fn read_script_csv<R: Read>(input: R) -> Result<Vec<(TradeDirection, RiskAppetite)>, EngineError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    let type_col = column(&headers, "trade_type")?;
    let appetite_col = column(&headers, "risk_appetite")?;
    let mut script = Vec::new();
    for record in r.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let direction = TradeDirection::from_code(field(type_col)).map_err(|e| malformed(&record, e))?;
        let appetite: RiskAppetite = field(appetite_col).parse().map_err(|e| malformed(&record, e))?;
        script.push((direction, appetite));
    }
    Ok(script)
}

/// Reads a full trades file back into records.
pub fn read_trades_csv<R: Read>(input: R) -> Result<Vec<TradeRecord>, EngineError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().ne(TRADES_HEADER) {
        return Err(EngineError::Malformed {
            line: 1,
            message: format!("expected header {}", TRADES_HEADER.join(",")),
        });
    }
    let mut trades = Vec::new();
    for record in r.records() {
        let record = record?;
        let parse = |i: usize| -> Result<&str, EngineError> {
            record.get(i).ok_or_else(|| malformed(&record, "short row"))
        };
        trades.push(TradeRecord {
            index: parse(0)?.parse().map_err(|e| malformed(&record, e))?,
            direction: TradeDirection::from_code(parse(1)?).map_err(|e| malformed(&record, e))?,
            appetite: parse(2)?.parse().map_err(|e| malformed(&record, e))?,
            open_price: parse(3)?.parse().map_err(|e| malformed(&record, e))?,
            post_price: parse(4)?.parse().map_err(|e| malformed(&record, e))?,
        });
    }
    Ok(trades)
}

/// The reward JSON written next to a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardSummary {
    pub seed: Option<u64>,
    pub n_trades: usize,
    #[serde(with = "rust_decimal::serde::arbitrary_precision")]
    pub aggregate_traders_reward: Decimal,
    #[serde(with = "rust_decimal::serde::arbitrary_precision")]
    pub intelligent_market_reward: Decimal,
    #[serde(with = "rust_decimal::serde::arbitrary_precision")]
    pub oracle_market_reward: Decimal,
    pub zero_sum_ok: bool,
}

impl RewardSummary {
    /// `seed` is `None` for replayed runs.
    pub fn new(seed: Option<u64>, result: &SimulationResult, report: &RewardReport) -> Self {
        RewardSummary {
            seed,
            n_trades: result.trades.len(),
            aggregate_traders_reward: report.aggregate_traders_reward,
            intelligent_market_reward: report.intelligent_market_reward,
            oracle_market_reward: report.oracle_market_reward,
            zero_sum_ok: report.zero_sum_ok(),
        }
    }
}
