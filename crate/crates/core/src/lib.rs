//! Seeded simulation of a sequential zero-sum game between random forex
//! traders and an intelligent market that counter-moves every trade, plus the
//! tooling to evaluate the resulting price series against historical data.
//!
//! - [`engine`]: trade generation, counter-moves, exact rewards.
//! - [`ohlc`]: fixed-length resampling and open-relative deviations.
//! - [`ingest`]: historical OHLC CSV parsing and batch extraction.
//! - [`report`]: comparison tables and SVG charts.

pub mod engine;
pub mod ingest;
pub mod ohlc;
pub mod report;

pub use engine::{
    aggregate_rewards, closed_form_market_reward, replay_simulation, run_simulation, simulate_seeded,
    EngineError, PricePipettes, RewardReport, RiskAppetite, SimulationConfig, SimulationResult,
    TradeDirection, TradeRecord,
};
pub use ohlc::{cumulative_split, resample, DeviationSplit, OhlcBar};
