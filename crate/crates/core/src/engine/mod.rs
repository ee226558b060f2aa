//! The sequential game between random traders and the intelligent market.
//!
//! Each round a trader picks a direction and a risk appetite; the market then
//! moves the price against that speculation by `appetite * ppt`. All prices are
//! integer pipettes and all rewards are exact decimals, so the zero-sum identity
//! holds as an equality.

mod io;
mod rewards;
mod rng;
mod types;

use thiserror::Error;

pub use io::{
    read_prices_csv, read_script_csv, read_trades_csv, write_prices_csv, write_trades_csv, RewardSummary,
};
pub use rewards::{aggregate_rewards, closed_form_market_reward, trader_reward, RewardReport};
pub use rng::{ScriptedSource, SeededSource, TradeSource};
pub use types::{
    AppetiteGrid, PricePipettes, RiskAppetite, SimulationConfig, SimulationResult, TradeDirection,
    TradeRecord, PIPETTES_PER_UNIT,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid risk appetite: {0}")]
    InvalidAppetite(String),
    #[error("invalid price: {0:?}")]
    InvalidPrice(String),
    #[error("invalid trade type {0:?} (expected 0 or 1)")]
    InvalidDirection(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("trade {index}: counter-move would take the price from {from} to {to}")]
    NonPositivePrice { index: usize, from: PricePipettes, to: PricePipettes },
    #[error("trade source ran out after {0} trades")]
    SourceExhausted(usize),
    #[error("appetite {appetite} is not on the {decimals}-dp grid")]
    OffGrid { appetite: RiskAppetite, decimals: u8 },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// +1 for a buy, -1 for a sell.
pub fn speculation_sign(direction: TradeDirection) -> i64 {
    direction.sign()
}

/// Size of the market's counter-move for one trade, in pipettes.
pub fn counter_adjustment(
    appetite: RiskAppetite,
    config: &SimulationConfig,
) -> Result<PricePipettes, EngineError> {
    let scaled = i64::from(appetite.hundredths()) * config.ppt.pipettes();
    if scaled % 100 != 0 {
        return Err(EngineError::InvalidConfig(format!(
            "appetite {appetite} with ppt {} is a fractional pipette",
            config.ppt
        )));
    }
    Ok(PricePipettes(scaled / 100))
}

/// Moves the price against the trader: buys push it down, sells push it up.
pub fn apply_counter_move(
    price: PricePipettes,
    direction: TradeDirection,
    appetite: RiskAppetite,
    config: &SimulationConfig,
) -> Result<PricePipettes, EngineError> {
    let adjustment = counter_adjustment(appetite, config)?;
    let next = PricePipettes(price.pipettes() - direction.sign() * adjustment.pipettes());
    if next.pipettes() <= 0 {
        return Err(EngineError::NonPositivePrice { index: 0, from: price, to: next });
    }
    Ok(next)
}

/// Plays `config.n_trades` rounds, drawing each move from `source`.
pub fn run_simulation<S: TradeSource + ?Sized>(
    config: &SimulationConfig,
    source: &mut S,
) -> Result<SimulationResult, EngineError> {
    config.validate()?;
    let grid = config.grid()?;
    let mut trades = Vec::with_capacity(config.n_trades);
    let mut progression = Vec::with_capacity(config.n_trades);
    let mut current = config.initial_price;

    for index in 0..config.n_trades {
        let (direction, appetite) =
            source.next_trade(grid).ok_or(EngineError::SourceExhausted(index))?;
        if !grid.contains(appetite) {
            return Err(EngineError::OffGrid { appetite, decimals: grid.decimals() });
        }
        let next = apply_counter_move(current, direction, appetite, config).map_err(|e| match e {
            EngineError::NonPositivePrice { from, to, .. } => {
                EngineError::NonPositivePrice { index, from, to }
            }
            other => other,
        })?;
        trades.push(TradeRecord { index, direction, appetite, open_price: current, post_price: next });
        progression.push(next);
        current = next;
    }

    Ok(SimulationResult {
        config: config.clone(),
        trades,
        price_progression: progression,
        final_price: current,
    })
}

/// Runs the seeded game described by `config`.
pub fn simulate_seeded(config: &SimulationConfig) -> Result<SimulationResult, EngineError> {
    run_simulation(config, &mut SeededSource::new(config.seed))
}

/// Same as [`run_simulation`] with the draws taken from `script`.
/// `n_trades` in the returned config is the script length.
pub fn replay_simulation(
    script: &[(TradeDirection, RiskAppetite)],
    initial_price: PricePipettes,
    config: &SimulationConfig,
) -> Result<SimulationResult, EngineError> {
    let config = SimulationConfig { n_trades: script.len(), initial_price, ..config.clone() };
    run_simulation(&config, &mut ScriptedSource::new(script))
}
