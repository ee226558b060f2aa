use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::types::{SimulationConfig, SimulationResult, TradeRecord, PricePipettes};

// Money is accumulated as integers of 1e-7 account units:
// appetite (1e-2) * lot * price delta (1e-5 pipettes).
const MONEY_SCALE: u32 = 7;

fn money(units: i128) -> Decimal {
    Decimal::from_i128_with_scale(units, MONEY_SCALE).normalize()
}

fn trader_reward_units(trade: &TradeRecord, final_price: PricePipettes, lot_size: u64) -> i128 {
    let delta = i128::from(final_price.pipettes() - trade.open_price.pipettes());
    i128::from(trade.appetite.hundredths())
        * i128::from(lot_size)
        * delta
        * i128::from(trade.direction.sign())
}

/// Payoff of one trader, settled at the final price:
/// `appetite * lot * (final - open) * sign`.
pub fn trader_reward(trade: &TradeRecord, final_price: PricePipettes, config: &SimulationConfig) -> Decimal {
    money(trader_reward_units(trade, final_price, config.lot_size))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardReport {
    pub per_trader: Vec<Decimal>,
    pub aggregate_traders_reward: Decimal,
    pub intelligent_market_reward: Decimal,
    /// Market reward from the closed form, for cross-checking.
    pub oracle_market_reward: Decimal,
}

impl RewardReport {
    pub fn zero_sum_ok(&self) -> bool {
        self.aggregate_traders_reward + self.intelligent_market_reward == Decimal::ZERO
    }

    pub fn oracle_ok(&self) -> bool {
        self.intelligent_market_reward == self.oracle_market_reward
    }
}

/// Settles every trader against the final price; the market takes the other side.
pub fn aggregate_rewards(result: &SimulationResult) -> RewardReport {
    let lot = result.config.lot_size;
    let units: Vec<i128> = result
        .trades
        .iter()
        .map(|t| trader_reward_units(t, result.final_price, lot))
        .collect();
    let aggregate: i128 = units.iter().sum();
    RewardReport {
        per_trader: units.into_iter().map(money).collect(),
        aggregate_traders_reward: money(aggregate),
        intelligent_market_reward: money(-aggregate),
        oracle_market_reward: closed_form_market_reward(&result.trades, &result.config),
    }
}

/// Market reward without replaying prices.
///
/// With `u_i = appetite_i * sign_i`, trader i sees the price fall by
/// `ppt * sum_{j >= i} u_j` between opening and settlement, so the traders lose
/// `lot * ppt * sum_{i <= j} u_i u_j = lot * ppt / 2 * ((sum u)^2 + sum u^2)`.
/// Depends only on the multiset of moves, not their order.
pub fn closed_form_market_reward(trades: &[TradeRecord], config: &SimulationConfig) -> Decimal {
    let (sum, sum_sq) = trades.iter().fold((0i128, 0i128), |(s, sq), t| {
        let u = i128::from(t.appetite.hundredths()) * i128::from(t.direction.sign());
        (s + u, sq + u * u)
    });
    // u is in hundredths and ppt in pipettes: scale 1e-4 * 1e-5 against money's 1e-7,
    // so divide by 100 and by the 2 in the formula. The numerator is always divisible.
    let numerator = i128::from(config.lot_size) * i128::from(config.ppt.pipettes()) * (sum * sum + sum_sq);
    debug_assert_eq!(numerator % 200, 0);
    money(numerator / 200)
}
