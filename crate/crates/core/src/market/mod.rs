//! Continuous double auction market rules.
//!
//! One order per step, strict quote improvement, settlement at the midpoint
//! as soon as the outstanding bid meets the outstanding ask, and a fixed
//! number of steps per trading day.

mod engine;
mod history;

pub use engine::{run_trading_day, DayEnd, DayResult, Trader, TraderOutcome};
pub use history::{HistoryWindow, RecordedOrder, TradePrint};

use serde::{Deserialize, Serialize};

use crate::price::Price;
use crate::strategies::StrategyKind;

pub type TraderId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Buyer,
    Seller,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bid,
    Ask,
}

impl Role {
    pub fn side(self) -> Side {
        match self {
            Role::Buyer => Side::Bid,
            Role::Seller => Side::Ask,
        }
    }
}

/// How long a winning trader stays out of the market after a settlement.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WinnerRemoval {
    /// Out for the rest of the trading day (single unit per trader per day).
    Day,
    /// Out only until the next round starts, which is immediately.
    #[default]
    Round,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub length_of_trading_day: u32,
    /// Zero means any strictly better price improves the quote.
    pub min_increment: Price,
    pub max_ask: Price,
    pub min_bid: Price,
    #[serde(default)]
    pub winner_removal: WinnerRemoval,
    /// Consecutive sweeps over the eligible traders without a single accepted
    /// order before the day is closed early.
    #[serde(default = "default_idle_sweeps")]
    pub idle_sweep_limit: u32,
}

fn default_idle_sweeps() -> u32 {
    50
}

impl MarketConfig {
    pub fn new(length_of_trading_day: u32, min_increment: Price, max_ask: Price, min_bid: Price) -> Self {
        MarketConfig {
            length_of_trading_day,
            min_increment,
            max_ask,
            min_bid,
            winner_removal: WinnerRemoval::default(),
            idle_sweep_limit: default_idle_sweeps(),
        }
    }

    pub fn validate(&self) -> Result<(), MarketError> {
        if self.length_of_trading_day == 0 {
            return Err(MarketError::InvalidConfig("length_of_trading_day must be at least 1".into()));
        }
        if self.min_bid >= self.max_ask {
            return Err(MarketError::InvalidConfig(format!(
                "min_bid {} must be below max_ask {}",
                self.min_bid, self.max_ask
            )));
        }
        if self.min_bid < Price::ZERO {
            return Err(MarketError::InvalidConfig("min_bid must be nonnegative".into()));
        }
        if self.min_increment < Price::ZERO {
            return Err(MarketError::InvalidConfig("min_increment must be nonnegative".into()));
        }
        if !(self.min_bid.is_on_grid() && self.max_ask.is_on_grid() && self.min_increment.is_on_grid()) {
            return Err(MarketError::InvalidConfig("market parameters must lie on the quote grid".into()));
        }
        if self.idle_sweep_limit == 0 {
            return Err(MarketError::InvalidConfig("idle_sweep_limit must be at least 1".into()));
        }
        Ok(())
    }

    /// Smallest price movement that counts as an improvement.
    pub fn improvement_step(&self) -> Price {
        self.min_increment.max(Price::TICK)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Order {
    pub trader: TraderId,
    pub side: Side,
    pub price: Price,
    pub step: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub buyer: TraderId,
    pub seller: TraderId,
    pub price: Price,
    pub step: u32,
    pub round: u64,
    /// Outstanding bid and ask at the moment the quotes crossed.
    pub bid: Price,
    pub ask: Price,
    pub buyer_surplus: Price,
    pub seller_surplus: Price,
}

/// A crossing of the outstanding quotes, before surpluses are attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cross {
    pub buyer: TraderId,
    pub seller: TraderId,
    pub bid: Price,
    pub ask: Price,
    pub price: Price,
    pub step: u32,
    pub round: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubmitOutcome {
    Improved,
    Rejected,
    Settled(Cross),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MarketError {
    #[error("invalid market configuration: {0}")]
    InvalidConfig(String),
    #[error("trader {trader} quoted {price} outside its budget [{lo}, {hi}]")]
    BudgetViolation { trader: TraderId, price: Price, lo: Price, hi: Price },
    #[error("trader {trader} submitted a {side:?} but trades as {role:?}")]
    WrongSide { trader: TraderId, side: Side, role: Role },
    #[error("market needs at least one buyer and one seller")]
    OneSidedMarket,
    #[error("duplicate trader id {0}")]
    DuplicateTrader(TraderId),
}

/// Outstanding quotes plus round/step counters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuoteState {
    pub o_bid: Price,
    pub o_ask: Price,
    pub round_index: u64,
    pub step_index: u32,
    bid_holder: Option<TraderId>,
    ask_holder: Option<TraderId>,
}

impl QuoteState {
    pub fn new(config: &MarketConfig) -> Self {
        QuoteState {
            o_bid: Price::ZERO,
            o_ask: config.max_ask,
            round_index: 0,
            step_index: 0,
            bid_holder: None,
            ask_holder: None,
        }
    }

    pub fn spread(&self) -> Price {
        self.o_ask - self.o_bid
    }

    pub fn bid_holder(&self) -> Option<TraderId> {
        self.bid_holder
    }

    pub fn ask_holder(&self) -> Option<TraderId> {
        self.ask_holder
    }

    pub fn reset_round(&mut self, config: &MarketConfig) {
        self.o_bid = Price::ZERO;
        self.o_ask = config.max_ask;
        self.bid_holder = None;
        self.ask_holder = None;
        self.round_index += 1;
    }

    pub fn improves(&self, side: Side, price: Price, config: &MarketConfig) -> bool {
        let delta = config.min_increment;
        match side {
            Side::Bid if delta == Price::ZERO => price > self.o_bid,
            Side::Bid => price >= self.o_bid + delta,
            Side::Ask if delta == Price::ZERO => price < self.o_ask,
            Side::Ask => price <= self.o_ask - delta,
        }
    }

    /// Applies the improvement and crossing rules to one order. A settlement
    /// resets the quotes for the next round before returning.
    pub fn submit(&mut self, order: &Order, config: &MarketConfig) -> SubmitOutcome {
        if !self.improves(order.side, order.price, config) {
            return SubmitOutcome::Rejected;
        }
        match order.side {
            Side::Bid => {
                self.o_bid = order.price;
                self.bid_holder = Some(order.trader);
            }
            Side::Ask => {
                self.o_ask = order.price;
                self.ask_holder = Some(order.trader);
            }
        }
        let step = self.step_index;
        self.step_index += 1;
        match (self.bid_holder, self.ask_holder) {
            (Some(buyer), Some(seller)) if self.o_bid >= self.o_ask => {
                let cross = Cross {
                    buyer,
                    seller,
                    bid: self.o_bid,
                    ask: self.o_ask,
                    price: Price::midpoint(self.o_bid, self.o_ask),
                    step,
                    round: self.round_index,
                };
                self.reset_round(config);
                SubmitOutcome::Settled(cross)
            }
            _ => SubmitOutcome::Improved,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraderState {
    pub id: TraderId,
    pub role: Role,
    /// Valuation for a buyer, cost for a seller.
    pub limit_price: Price,
    pub strategy: StrategyKind,
    pub active: bool,
    pub surplus: Price,
    pub wins: u32,
}

impl TraderState {
    pub fn new(id: TraderId, role: Role, limit_price: Price, strategy: StrategyKind) -> Self {
        TraderState { id, role, limit_price, strategy, active: true, surplus: Price::ZERO, wins: 0 }
    }

    /// Budget interval a quote from this trader must fall in.
    pub fn budget(&self, config: &MarketConfig) -> (Price, Price) {
        match self.role {
            Role::Buyer => (config.min_bid, self.limit_price),
            Role::Seller => (self.limit_price, config.max_ask),
        }
    }
}

/// Whether the trader may quote at all: it is active and its limit price
/// still leaves room to improve on the outstanding quote of its side.
pub fn eligible(trader: &TraderState, state: &QuoteState, config: &MarketConfig) -> bool {
    trader.active && state.improves(trader.role.side(), trader.limit_price, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(max: i64) -> MarketConfig {
        MarketConfig::new(1000, Price::ZERO, Price::from_units(max), Price::ZERO)
    }

    fn p(x: f64) -> Price {
        Price::from_f64(x)
    }

    fn order(trader: TraderId, side: Side, price: f64) -> Order {
        Order { trader, side, price: p(price), step: 0 }
    }

    #[test]
    fn reset_round_restores_bounds() {
        let cfg = config(100);
        let mut st = QuoteState::new(&cfg);
        st.o_bid = p(7.0);
        st.o_ask = p(8.0);
        let old = st.round_index;
        st.reset_round(&cfg);
        assert_eq!((st.o_bid, st.o_ask), (Price::ZERO, Price::from_units(100)));
        assert_eq!(st.round_index, old + 1);

        let cfg = config(1000);
        let st = QuoteState::new(&cfg);
        assert_eq!((st.o_bid, st.o_ask), (Price::ZERO, Price::from_units(1000)));
    }

    #[test]
    fn crossing_bid_settles_at_midpoint() {
        let cfg = config(100);
        let mut st = QuoteState::new(&cfg);
        assert_eq!(st.submit(&order(1, Side::Bid, 3.0), &cfg), SubmitOutcome::Improved);
        assert_eq!(st.submit(&order(2, Side::Ask, 4.0), &cfg), SubmitOutcome::Improved);
        let round = st.round_index;
        match st.submit(&order(3, Side::Bid, 5.0), &cfg) {
            SubmitOutcome::Settled(c) => {
                assert_eq!(c.price, p(4.5));
                assert_eq!((c.buyer, c.seller), (3, 2));
                assert_eq!((c.bid, c.ask), (p(5.0), p(4.0)));
                assert_eq!(c.round, round);
                assert_eq!(c.step, 2);
            }
            other => panic!("expected settlement, got {other:?}"),
        }
        assert_eq!(st.step_index, 3);
        assert_eq!((st.o_bid, st.o_ask), (Price::ZERO, cfg.max_ask));
        assert_eq!(st.round_index, round + 1);
    }

    #[test]
    fn non_improving_ask_is_rejected_without_a_step() {
        let cfg = config(100);
        let mut st = QuoteState::new(&cfg);
        st.submit(&order(1, Side::Ask, 6.0), &cfg);
        let before = st.clone();
        assert_eq!(st.submit(&order(2, Side::Ask, 7.0), &cfg), SubmitOutcome::Rejected);
        assert_eq!(st.submit(&order(2, Side::Ask, 6.0), &cfg), SubmitOutcome::Rejected);
        assert_eq!(st, before);
    }

    #[test]
    fn first_bid_improves() {
        let cfg = config(100);
        let mut st = QuoteState::new(&cfg);
        assert_eq!(st.submit(&order(1, Side::Bid, 2.0), &cfg), SubmitOutcome::Improved);
        assert_eq!(st.o_bid, p(2.0));
        assert_eq!(st.step_index, 1);
    }

    #[test]
    fn tie_settles_at_common_price() {
        let cfg = config(100);
        let mut st = QuoteState::new(&cfg);
        st.submit(&order(1, Side::Ask, 6.0), &cfg);
        match st.submit(&order(2, Side::Bid, 6.0), &cfg) {
            SubmitOutcome::Settled(c) => assert_eq!(c.price, p(6.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn positive_increment() {
        let mut cfg = config(100);
        cfg.min_increment = p(0.5);
        let mut st = QuoteState::new(&cfg);
        st.submit(&order(1, Side::Bid, 2.0), &cfg);
        assert_eq!(st.submit(&order(2, Side::Bid, 2.4), &cfg), SubmitOutcome::Rejected);
        assert_eq!(st.submit(&order(2, Side::Bid, 2.5), &cfg), SubmitOutcome::Improved);
    }

    #[test]
    fn eligibility() {
        let cfg = config(100);
        let mut st = QuoteState::new(&cfg);
        st.o_bid = p(5.0);
        st.o_ask = p(10.0);
        let buyer = TraderState::new(0, Role::Buyer, p(4.0), StrategyKind::Zi);
        assert!(!eligible(&buyer, &st, &cfg));
        let seller = TraderState::new(1, Role::Seller, p(3.0), StrategyKind::Zi);
        assert!(eligible(&seller, &st, &cfg));
        let boundary = TraderState::new(2, Role::Seller, p(10.0), StrategyKind::Zi);
        assert!(!eligible(&boundary, &st, &cfg));
        let mut inactive = TraderState::new(3, Role::Buyer, p(9.0), StrategyKind::Zi);
        inactive.active = false;
        assert!(!eligible(&inactive, &st, &cfg));
    }

    #[test]
    fn config_validation() {
        assert!(config(100).validate().is_ok());
        let mut bad = config(100);
        bad.min_bid = bad.max_ask;
        assert!(bad.validate().is_err());
        let mut bad = config(100);
        bad.length_of_trading_day = 0;
        assert!(bad.validate().is_err());
    }
}
