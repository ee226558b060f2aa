use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EngineError;

/// Pipettes per whole price unit (1 pipette = 0.00001).
pub const PIPETTES_PER_UNIT: i64 = 100_000;
const PRICE_DECIMALS: usize = 5;

/// A trader's speculation: up (buy) or down (sell).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TradeDirection {
    Buy,
    Sell,
}

impl TradeDirection {
    /// +1 for a buy, -1 for a sell.
    pub fn sign(self) -> i64 {
        match self {
            TradeDirection::Buy => 1,
            TradeDirection::Sell => -1,
        }
    }

    /// Wire code used in trade files: `0` buy, `1` sell.
    pub fn code(self) -> u8 {
        match self {
            TradeDirection::Buy => 0,
            TradeDirection::Sell => 1,
        }
    }

    pub fn from_code(code: &str) -> Result<Self, EngineError> {
        match code.trim() {
            "0" => Ok(TradeDirection::Buy),
            "1" => Ok(TradeDirection::Sell),
            other => Err(EngineError::InvalidDirection(other.to_string())),
        }
    }
}

impl fmt::Display for TradeDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Quantization grid for sampled risk appetites.
///
/// `Hundredths` is `{0.01, 0.02, ..., 1.00}`, `Tenths` is `{0.1, ..., 1.0}`.
/// Zero is never on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AppetiteGrid {
    Tenths,
    Hundredths,
}

impl AppetiteGrid {
    pub fn from_decimals(decimals: u8) -> Result<Self, EngineError> {
        match decimals {
            1 => Ok(AppetiteGrid::Tenths),
            2 => Ok(AppetiteGrid::Hundredths),
            d => Err(EngineError::InvalidConfig(format!(
                "appetite_decimals must be 1 or 2, got {d}"
            ))),
        }
    }

    pub fn decimals(self) -> u8 {
        match self {
            AppetiteGrid::Tenths => 1,
            AppetiteGrid::Hundredths => 2,
        }
    }

    /// Number of points on the grid.
    pub fn steps(self) -> u32 {
        match self {
            AppetiteGrid::Tenths => 10,
            AppetiteGrid::Hundredths => 100,
        }
    }

    /// Width of one grid step in hundredths.
    pub fn step_hundredths(self) -> u32 {
        100 / self.steps()
    }

    pub fn contains(self, appetite: RiskAppetite) -> bool {
        appetite.hundredths().is_multiple_of(self.step_hundredths())
    }
}

/// Trader confidence in `(0, 1]`, held as an integer count of hundredths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RiskAppetite(u32);

impl RiskAppetite {
    pub const MAX: RiskAppetite = RiskAppetite(100);

    pub fn from_hundredths(hundredths: u32) -> Result<Self, EngineError> {
        if hundredths == 0 || hundredths > 100 {
            return Err(EngineError::InvalidAppetite(format!(
                "{hundredths}/100 is outside (0, 1]"
            )));
        }
        Ok(RiskAppetite(hundredths))
    }

    pub fn hundredths(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 100.0
    }
}

impl fmt::Display for RiskAppetite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl FromStr for RiskAppetite {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || EngineError::InvalidAppetite(format!("cannot parse {s:?}"));
        let units = parse_fixed(s.trim(), 2).ok_or_else(bad)?;
        let hundredths = u32::try_from(units).map_err(|_| bad())?;
        RiskAppetite::from_hundredths(hundredths)
    }
}

/// A price as a signed integer count of pipettes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PricePipettes(pub i64);

impl PricePipettes {
    pub const fn new(pipettes: i64) -> Self {
        PricePipettes(pipettes)
    }

    pub const fn pipettes(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / PIPETTES_PER_UNIT as f64
    }
}

impl fmt::Display for PricePipettes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let unit = PIPETTES_PER_UNIT as u64;
        write!(f, "{sign}{}.{:05}", abs / unit, abs % unit)
    }
}

impl FromStr for PricePipettes {
    type Err = EngineError;

    /// Accepts up to five decimal places; shorter quotes are right-padded.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_fixed(s.trim(), PRICE_DECIMALS)
            .map(PricePipettes)
            .ok_or_else(|| EngineError::InvalidPrice(s.to_string()))
    }
}

impl Serialize for PricePipettes {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PricePipettes {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a plain decimal string into an integer scaled by `10^decimals`.
/// Extra fractional digits are accepted only when they are zeros.
pub(crate) fn parse_fixed(s: &str, decimals: usize) -> Option<i64> {
    let (negative, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    let (kept, rest) = frac_part.split_at(frac_part.len().min(decimals));
    if rest.bytes().any(|b| b != b'0') {
        return None;
    }
    let scale = 10i64.checked_pow(decimals as u32)?;
    let int_value: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
    let mut frac_value: i64 = if kept.is_empty() { 0 } else { kept.parse().ok()? };
    for _ in kept.len()..decimals {
        frac_value *= 10;
    }
    let magnitude = int_value.checked_mul(scale)?.checked_add(frac_value)?;
    Some(if negative { -magnitude } else { magnitude })
}

/// Run parameters for one game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n_trades: usize,
    pub initial_price: PricePipettes,
    /// Price move per unit of appetite (0.001 by default, i.e. 100 pipettes).
    pub ppt: PricePipettes,
    pub lot_size: u64,
    pub seed: u64,
    pub appetite_decimals: u8,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_trades: 200_000,
            initial_price: PricePipettes(108_280),
            ppt: PricePipettes(100),
            lot_size: 100_000,
            seed: 0,
            appetite_decimals: 2,
        }
    }
}

impl SimulationConfig {
    pub fn new(n_trades: usize, seed: u64) -> Self {
        SimulationConfig { n_trades, seed, ..Default::default() }
    }

    pub fn with_initial_price(mut self, price: PricePipettes) -> Self {
        self.initial_price = price;
        self
    }

    pub fn grid(&self) -> Result<AppetiteGrid, EngineError> {
        AppetiteGrid::from_decimals(self.appetite_decimals)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let grid = self.grid()?;
        if self.initial_price.0 <= 0 {
            return Err(EngineError::InvalidConfig(format!(
                "initial price must be positive, got {}",
                self.initial_price
            )));
        }
        if self.ppt.0 <= 0 {
            return Err(EngineError::InvalidConfig(format!("ppt must be positive, got {}", self.ppt)));
        }
        if self.lot_size == 0 {
            return Err(EngineError::InvalidConfig("lot size must be positive".into()));
        }
        // Every grid step has to move the price by a whole number of pipettes.
        if (self.ppt.0 * i64::from(grid.step_hundredths())) % 100 != 0 {
            return Err(EngineError::InvalidConfig(format!(
                "ppt {} yields fractional pipette adjustments on a {}-dp appetite grid",
                self.ppt,
                grid.decimals()
            )));
        }
        Ok(())
    }
}

/// One round of the game: the trader's move and the market's reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub index: usize,
    pub direction: TradeDirection,
    pub appetite: RiskAppetite,
    /// Price when the trade was opened.
    pub open_price: PricePipettes,
    /// Price after the market's counter-move.
    pub post_price: PricePipettes,
}

impl Serialize for RiskAppetite {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RiskAppetite {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationResult {
    pub config: SimulationConfig,
    pub trades: Vec<TradeRecord>,
    /// Post-counter-move price after each trade.
    pub price_progression: Vec<PricePipettes>,
    pub final_price: PricePipettes,
}

impl SimulationResult {
    /// Prices at which each trade was opened.
    pub fn open_prices(&self) -> Vec<PricePipettes> {
        self.trades.iter().map(|t| t.open_price).collect()
    }

    /// The `(direction, appetite)` draws that produced this result.
    pub fn script(&self) -> Vec<(TradeDirection, RiskAppetite)> {
        self.trades.iter().map(|t| (t.direction, t.appetite)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn price_parse_and_format() {
        let p: PricePipettes = "1.0828".parse().unwrap();
        assert_eq!(p, PricePipettes(108_280));
        assert_eq!(p.to_string(), "1.08280");
        assert_eq!("0.00001".parse::<PricePipettes>().unwrap(), PricePipettes(1));
        assert_eq!("1.082700".parse::<PricePipettes>().unwrap(), PricePipettes(108_270));
        assert_eq!("2".parse::<PricePipettes>().unwrap(), PricePipettes(200_000));
        assert_eq!(PricePipettes(-5).to_string(), "-0.00005");
        assert_eq!("-0.00005".parse::<PricePipettes>().unwrap(), PricePipettes(-5));
    }

    #[test]
    fn price_parse_rejects_garbage() {
        for bad in ["", ".", "abc", "1.000001", "1.2.3", "1e5", "--1"] {
            assert!(bad.parse::<PricePipettes>().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn appetite_parse() {
        assert_eq!("0.43".parse::<RiskAppetite>().unwrap().hundredths(), 43);
        assert_eq!("0.9".parse::<RiskAppetite>().unwrap().to_string(), "0.90");
        assert_eq!("1".parse::<RiskAppetite>().unwrap(), RiskAppetite::MAX);
        assert!("0".parse::<RiskAppetite>().is_err());
        assert!("0.00".parse::<RiskAppetite>().is_err());
        assert!("1.01".parse::<RiskAppetite>().is_err());
        assert!("0.435".parse::<RiskAppetite>().is_err());
        assert!("-0.5".parse::<RiskAppetite>().is_err());
    }

    #[test]
    fn direction_codes() {
        assert_eq!(TradeDirection::Buy.code(), 0);
        assert_eq!(TradeDirection::Sell.code(), 1);
        assert_eq!(TradeDirection::from_code("1").unwrap(), TradeDirection::Sell);
        assert!(TradeDirection::from_code("2").is_err());
    }

    #[test]
    fn default_config_constants() {
        let config = SimulationConfig::default();
        // ppt * lot = 0.001 * 100000 = 100
        assert_eq!(config.ppt.0 as u64 * config.lot_size / PIPETTES_PER_UNIT as u64, 100);
        assert_eq!(config.initial_price.to_string(), "1.08280");
        config.validate().unwrap();
    }

    #[test]
    fn config_rejects_fractional_pipette_ppt() {
        let config = SimulationConfig { ppt: PricePipettes(150), ..Default::default() };
        assert!(config.validate().is_err());
        let tenths = SimulationConfig { appetite_decimals: 1, ..config };
        tenths.validate().unwrap();
        let bad_decimals = SimulationConfig { appetite_decimals: 3, ..Default::default() };
        assert!(bad_decimals.validate().is_err());
        let bad_price = SimulationConfig { initial_price: PricePipettes(0), ..Default::default() };
        assert!(bad_price.validate().is_err());
    }

    #[test]
    fn grid_membership() {
        let a = RiskAppetite::from_hundredths(43).unwrap();
        assert!(AppetiteGrid::Hundredths.contains(a));
        assert!(!AppetiteGrid::Tenths.contains(a));
        assert!(AppetiteGrid::Tenths.contains(RiskAppetite::from_hundredths(40).unwrap()));
    }
}
