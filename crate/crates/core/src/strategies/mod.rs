//! Bidding strategies.
//!
//! Every strategy maps the publicly observable market state to a quote or
//! an abstention. Quotes always respect the trader's budget; the market
//! decides whether they improve on the outstanding quote.

mod aa;
pub mod belief;
mod bh;
mod gd;
pub mod poly;
mod zi;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

pub use aa::{aa_quote, aa_target, aa_update, AaState, AaStrategy};
pub use bh::{
    bh_best_ask, bh_best_bid, bh_decide, bh_estimate_equilibrium, bh_first_round_ask, bh_first_round_bid,
    bh_fit_beliefs, bh_unaggressive_ask, bh_unaggressive_bid, BhStrategy,
};
pub use gd::{gd_quote, GdStrategy};
pub use zi::{zi_quote, ZiStrategy};

use crate::market::{HistoryWindow, MarketConfig, Role, Side, TraderState};
use crate::price::Price;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Zi,
    Gd,
    Aa,
    Bh,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [StrategyKind::Zi, StrategyKind::Gd, StrategyKind::Aa, StrategyKind::Bh];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Zi => "zi",
            StrategyKind::Gd => "gd",
            StrategyKind::Aa => "aa",
            StrategyKind::Bh => "bh",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown strategy `{0}` (expected zi, gd, aa or bh)")]
pub struct UnknownStrategy(pub String);

impl FromStr for StrategyKind {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zi" => Ok(StrategyKind::Zi),
            "gd" => Ok(StrategyKind::Gd),
            "aa" => Ok(StrategyKind::Aa),
            "bh" => Ok(StrategyKind::Bh),
            _ => Err(UnknownStrategy(s.to_string())),
        }
    }
}

/// Tunable strategy parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyParams {
    /// Transactions in the weighted moving average of the equilibrium estimate.
    pub hn: usize,
    /// Completed rounds of order history kept for belief counting.
    pub memory_rounds: usize,
    /// Damping of the first-round quote update.
    pub eta: f64,
    /// AA learning rate.
    pub beta: f64,
    /// AA target shaping parameter.
    pub theta: f64,
    /// AA starting aggressiveness.
    pub initial_r: f64,
    /// Evenly spaced sample points added to the BH belief fit.
    pub fit_grid: usize,
    /// Safety-net grid of the BH expected-surplus maximization.
    pub search_grid: usize,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            hn: 8,
            memory_rounds: 5,
            eta: 3.0,
            beta: 0.3,
            theta: 2.0,
            initial_r: 0.0,
            fit_grid: 16,
            search_grid: 1024,
        }
    }
}

impl StrategyParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.hn == 0 {
            return Err("hn must be at least 1".into());
        }
        if self.memory_rounds == 0 {
            return Err("memory_rounds must be at least 1".into());
        }
        if self.eta.is_nan() || self.eta < 1.0 {
            return Err("eta must be at least 1".into());
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err("beta must lie in (0, 1]".into());
        }
        if self.theta.is_nan() || self.theta <= 0.0 {
            return Err("theta must be positive".into());
        }
        if !(-1.0..=1.0).contains(&self.initial_r) {
            return Err("initial_r must lie in [-1, 1]".into());
        }
        Ok(())
    }
}

/// Read-only snapshot of what a trader can observe.
#[derive(Clone, Copy, Debug)]
pub struct MarketView<'a> {
    pub o_bid: Price,
    pub o_ask: Price,
    pub config: &'a MarketConfig,
    pub history: &'a HistoryWindow,
    /// No transaction has happened yet today.
    pub is_first_round_of_day: bool,
}

impl MarketView<'_> {
    /// Quotes `me` could submit that improve on the outstanding quote of its
    /// side and stay within budget, as a closed interval of grid prices.
    pub fn feasible_interval(&self, me: &TraderState) -> Option<(Price, Price)> {
        let step = self.config.improvement_step();
        let (lo, hi) = match me.role {
            Role::Buyer => ((self.o_bid + step).max(self.config.min_bid), me.limit_price),
            Role::Seller => (me.limit_price, (self.o_ask - step).min(self.config.max_ask)),
        };
        (lo <= hi).then_some((lo, hi))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MarketEvent {
    /// An order was accepted as the new outstanding quote.
    Order {
        side: Side,
        price: Price,
    },
    Trade {
        price: Price,
    },
}

pub trait Strategy: Send {
    fn kind(&self) -> StrategyKind;

    /// Next quote, or `None` to abstain this time.
    fn quote(&mut self, me: &TraderState, view: &MarketView<'_>, rng: &mut dyn RngCore) -> Option<Price>;

    /// Whether [`Strategy::observe`] should be called for market events.
    fn observes_market(&self) -> bool {
        false
    }

    fn observe(&mut self, _me: &TraderState, _event: &MarketEvent, _view: &MarketView<'_>) {}
}

pub fn build_strategy(kind: StrategyKind, params: &StrategyParams) -> Box<dyn Strategy> {
    match kind {
        StrategyKind::Zi => Box::new(ZiStrategy),
        StrategyKind::Gd => Box::new(GdStrategy::new()),
        StrategyKind::Aa => Box::new(AaStrategy::new(params)),
        StrategyKind::Bh => Box::new(BhStrategy::new(params)),
    }
}

/// Uniform grid price in `[lo, hi]`.
pub(crate) fn uniform_price<R: Rng + ?Sized>(rng: &mut R, lo: Price, hi: Price) -> Price {
    if lo >= hi {
        return lo;
    }
    let x = rng.gen_range(lo.to_f64()..=hi.to_f64());
    Price::from_f64(x).clamp(lo, hi)
}

/// Nearest grid price to `x` inside `[lo, hi]`.
pub(crate) fn snap(x: f64, lo: Price, hi: Price) -> Price {
    Price::from_f64(x).clamp(lo, hi)
}
