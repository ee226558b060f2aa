//! Trade draw sources.
//!
//! The seeded source is frozen: xoshiro256** seeded through SplitMix64
//! (`rand_xoshiro::Xoshiro256StarStar::seed_from_u64`). Each trade consumes
//! one 64-bit word for its direction (top bit: 0 buy, 1 sell) and then one or
//! more words for its appetite (unbiased rejection sampling onto the grid).
//! Changing any of this changes every seeded run.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use super::types::{AppetiteGrid, RiskAppetite, TradeDirection};

/// Anything that can supply the next trader's move.
pub trait TradeSource {
    /// Returns `None` when the source is exhausted.
    fn next_trade(&mut self, grid: AppetiteGrid) -> Option<(TradeDirection, RiskAppetite)>;
}

/// Deterministic uniform source keyed by a 64-bit seed.
#[derive(Debug, Clone)]
pub struct SeededSource {
    rng: Xoshiro256StarStar,
}

impl SeededSource {
    pub fn new(seed: u64) -> Self {
        SeededSource { rng: Xoshiro256StarStar::seed_from_u64(seed) }
    }

    pub fn next_direction(&mut self) -> TradeDirection {
        if self.rng.next_u64() >> 63 == 0 {
            TradeDirection::Buy
        } else {
            TradeDirection::Sell
        }
    }

    /// Uniform over the grid points, zero excluded.
    pub fn next_appetite(&mut self, grid: AppetiteGrid) -> RiskAppetite {
        let steps = u64::from(grid.steps());
        // Accept words in [0, 2^64 - (2^64 mod steps)), a whole number of periods.
        let limit = u64::MAX - (u64::MAX % steps + 1) % steps;
        let k = loop {
            let word = self.rng.next_u64();
            if word <= limit {
                break word % steps + 1;
            }
        };
        let hundredths = k as u32 * grid.step_hundredths();
        RiskAppetite::from_hundredths(hundredths).expect("grid point is in (0, 1]")
    }
}

impl TradeSource for SeededSource {
    fn next_trade(&mut self, grid: AppetiteGrid) -> Option<(TradeDirection, RiskAppetite)> {
        let direction = self.next_direction();
        let appetite = self.next_appetite(grid);
        Some((direction, appetite))
    }
}

/// Replays a fixed list of moves.
#[derive(Debug, Clone)]
pub struct ScriptedSource<'a> {
    script: std::slice::Iter<'a, (TradeDirection, RiskAppetite)>,
}

impl<'a> ScriptedSource<'a> {
    pub fn new(script: &'a [(TradeDirection, RiskAppetite)]) -> Self {
        ScriptedSource { script: script.iter() }
    }
}

impl TradeSource for ScriptedSource<'_> {
    fn next_trade(&mut self, _grid: AppetiteGrid) -> Option<(TradeDirection, RiskAppetite)> {
        self.script.next().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = SeededSource::new(99);
        let mut b = SeededSource::new(99);
        for _ in 0..1000 {
            assert_eq!(
                a.next_trade(AppetiteGrid::Hundredths),
                b.next_trade(AppetiteGrid::Hundredths)
            );
        }
    }

    #[test]
    fn different_seeds_diverge() {
        let mut a = SeededSource::new(1);
        let mut b = SeededSource::new(2);
        let xs: Vec<_> = (0..32).map(|_| a.next_trade(AppetiteGrid::Hundredths)).collect();
        let ys: Vec<_> = (0..32).map(|_| b.next_trade(AppetiteGrid::Hundredths)).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn draws_stay_on_grid() {
        let mut src = SeededSource::new(5);
        for _ in 0..10_000 {
            let a = src.next_appetite(AppetiteGrid::Tenths);
            assert!(AppetiteGrid::Tenths.contains(a));
            let b = src.next_appetite(AppetiteGrid::Hundredths);
            assert!((1..=100).contains(&b.hundredths()));
        }
    }

    #[test]
    fn every_grid_point_is_reachable() {
        let mut src = SeededSource::new(11);
        let mut seen = [false; 101];
        for _ in 0..20_000 {
            seen[src.next_appetite(AppetiteGrid::Hundredths).hundredths() as usize] = true;
        }
        assert!(!seen[0]);
        assert!(seen[1..].iter().all(|&s| s));
    }

    #[test]
    fn directions_roughly_balanced() {
        let mut src = SeededSource::new(3);
        let buys = (0..100_000)
            .filter(|_| src.next_direction() == TradeDirection::Buy)
            .count();
        // 5 sigma for a fair coin over 1e5 flips is about 790
        assert!((buys as i64 - 50_000).abs() < 800, "buys = {buys}");
    }

    #[test]
    fn frozen_stream() {
        // Pins the generator + sampling so seeds stay stable across releases.
        let mut src = SeededSource::new(42);
        let draws: Vec<String> = (0..5)
            .map(|_| {
                let (d, a) = src.next_trade(AppetiteGrid::Hundredths).unwrap();
                format!("{d}:{a}")
            })
            .collect();
        assert_eq!(draws, FROZEN_SEED_42);
    }

    // Cross-checked against a from-scratch SplitMix64 + xoshiro256** script.
    const FROZEN_SEED_42: [&str; 5] = ["0:0.03", "1:0.94", "1:0.85", "1:0.08", "1:0.86"];

    #[test]
    fn scripted_source_exhausts() {
        let script = [(TradeDirection::Buy, RiskAppetite::MAX)];
        let mut src = ScriptedSource::new(&script);
        assert!(src.next_trade(AppetiteGrid::Hundredths).is_some());
        assert!(src.next_trade(AppetiteGrid::Hundredths).is_none());
    }
}
