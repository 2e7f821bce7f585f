use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    eligible, HistoryWindow, MarketConfig, MarketError, Order, QuoteState, Role, SubmitOutcome, TraderId, TraderState,
    Transaction, WinnerRemoval,
};
use crate::price::Price;
use crate::strategies::{MarketEvent, MarketView, Strategy};

pub struct Trader {
    pub state: TraderState,
    pub strategy: Box<dyn Strategy>,
}

impl Trader {
    pub fn new(state: TraderState, strategy: Box<dyn Strategy>) -> Self {
        Trader { state, strategy }
    }
}

impl std::fmt::Debug for Trader {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Trader").field("state", &self.state).finish_non_exhaustive()
    }
}

/// Per-trader totals for one day.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraderOutcome {
    pub id: TraderId,
    pub role: Role,
    pub limit_price: Price,
    pub surplus: Price,
    pub wins: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayEnd {
    StepLimit,
    NoEligibleTraders,
    NoGainsFromTrade,
    AllDeclined,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DayResult {
    /// Every order the market accepted, in step order.
    pub orders: Vec<Order>,
    pub transactions: Vec<Transaction>,
    pub traders: Vec<TraderOutcome>,
    pub steps: u32,
    pub rounds_started: u64,
    pub end: DayEnd,
    /// Time spent inside strategy quote decisions.
    pub decision_time: Duration,
}

impl DayResult {
    pub fn prices(&self) -> Vec<Price> {
        self.transactions.iter().map(|t| t.price).collect()
    }

    pub fn buyer_surplus(&self) -> Price {
        self.transactions.iter().map(|t| t.buyer_surplus).sum()
    }

    pub fn seller_surplus(&self) -> Price {
        self.transactions.iter().map(|t| t.seller_surplus).sum()
    }

    pub fn total_surplus(&self) -> Price {
        self.buyer_surplus() + self.seller_surplus()
    }
}

/// Runs one trading day.
///
/// Each step draws eligible traders uniformly at random, without
/// replacement, until one of them submits an order the market accepts. A
/// trader that abstains or quotes a non-improving price is skipped and no
/// step is consumed. The day closes at the step limit, when nobody is
/// eligible, when no active buyer values the good at or above some active
/// seller's cost, or after `config.idle_sweep_limit` consecutive sweeps in
/// which every eligible trader declined.
///
/// `memory_rounds` is the number of completed rounds kept in the public order
/// history. Everything random flows through `rng`.
pub fn run_trading_day<R: Rng>(
    traders: &mut [Trader],
    config: &MarketConfig,
    memory_rounds: usize,
    rng: &mut R,
) -> Result<DayResult, MarketError> {
    config.validate()?;
    if !traders.iter().any(|t| t.state.role == Role::Buyer) || !traders.iter().any(|t| t.state.role == Role::Seller) {
        return Err(MarketError::OneSidedMarket);
    }
    let mut index: HashMap<TraderId, usize> = HashMap::with_capacity(traders.len());
    for (i, t) in traders.iter().enumerate() {
        if index.insert(t.state.id, i).is_some() {
            return Err(MarketError::DuplicateTrader(t.state.id));
        }
    }

    let opening: Vec<(Price, u32)> = traders.iter().map(|t| (t.state.surplus, t.state.wins)).collect();
    for t in traders.iter_mut() {
        t.state.active = true;
    }
    let observers: Vec<usize> = (0..traders.len()).filter(|&i| traders[i].strategy.observes_market()).collect();

    let mut quotes = QuoteState::new(config);
    let mut history = HistoryWindow::new(memory_rounds);
    let mut orders = Vec::new();
    let mut transactions = Vec::new();
    let mut decision_time = Duration::ZERO;
    let mut pool = Vec::with_capacity(traders.len());

    let end = 'day: loop {
        if quotes.step_index >= config.length_of_trading_day {
            break DayEnd::StepLimit;
        }
        if !gains_remain(traders) {
            break DayEnd::NoGainsFromTrade;
        }
        let candidates: Vec<usize> =
            (0..traders.len()).filter(|&i| eligible(&traders[i].state, &quotes, config)).collect();
        if candidates.is_empty() {
            break DayEnd::NoEligibleTraders;
        }

        let mut idle_sweeps = 0;
        let (idx, order, outcome) = 'attempt: loop {
            pool.clear();
            pool.extend_from_slice(&candidates);
            while !pool.is_empty() {
                let idx = pool.swap_remove(rng.gen_range(0..pool.len()));
                let trader = &mut traders[idx];
                let view = MarketView {
                    o_bid: quotes.o_bid,
                    o_ask: quotes.o_ask,
                    config,
                    history: &history,
                    is_first_round_of_day: transactions.is_empty(),
                };
                let started = Instant::now();
                let quote = trader.strategy.quote(&trader.state, &view, &mut *rng);
                decision_time += started.elapsed();
                let Some(price) = quote else { continue };
                let order =
                    Order { trader: trader.state.id, side: trader.state.role.side(), price, step: quotes.step_index };
                check_budget(&trader.state, &order, config)?;
                match quotes.submit(&order, config) {
                    SubmitOutcome::Rejected => continue,
                    outcome => break 'attempt (idx, order, outcome),
                }
            }
            idle_sweeps += 1;
            if idle_sweeps >= config.idle_sweep_limit {
                break 'day DayEnd::AllDeclined;
            }
        };

        history.record_order(traders[idx].state.id, order.side, order.price);
        notify(
            traders,
            &observers,
            &MarketEvent::Order { side: order.side, price: order.price },
            &quotes,
            config,
            &history,
            &transactions,
        );
        orders.push(order);

        if let SubmitOutcome::Settled(cross) = outcome {
            let b = index[&cross.buyer];
            let s = index[&cross.seller];
            let buyer_surplus = traders[b].state.limit_price - cross.price;
            let seller_surplus = cross.price - traders[s].state.limit_price;
            for (i, gain) in [(b, buyer_surplus), (s, seller_surplus)] {
                let st = &mut traders[i].state;
                st.surplus += gain;
                st.wins += 1;
                st.active = false;
            }
            if config.winner_removal == WinnerRemoval::Round {
                for t in traders.iter_mut() {
                    t.state.active = true;
                }
            }
            history.close_round(Some((cross.buyer, cross.seller)));
            history.record_transaction(cross.price, cross.step);
            transactions.push(Transaction {
                buyer: cross.buyer,
                seller: cross.seller,
                price: cross.price,
                step: cross.step,
                round: cross.round,
                bid: cross.bid,
                ask: cross.ask,
                buyer_surplus,
                seller_surplus,
            });
            notify(
                traders,
                &observers,
                &MarketEvent::Trade { price: cross.price },
                &quotes,
                config,
                &history,
                &transactions,
            );
        }
    };

    let outcomes = traders
        .iter()
        .zip(opening)
        .map(|(t, (surplus, wins))| TraderOutcome {
            id: t.state.id,
            role: t.state.role,
            limit_price: t.state.limit_price,
            surplus: t.state.surplus - surplus,
            wins: t.state.wins - wins,
        })
        .collect();

    Ok(DayResult {
        orders,
        transactions,
        traders: outcomes,
        steps: quotes.step_index,
        rounds_started: quotes.round_index + 1,
        end,
        decision_time,
    })
}

fn check_budget(state: &TraderState, order: &Order, config: &MarketConfig) -> Result<(), MarketError> {
    if order.side != state.role.side() {
        return Err(MarketError::WrongSide { trader: state.id, side: order.side, role: state.role });
    }
    let (lo, hi) = state.budget(config);
    if order.price < lo || order.price > hi {
        return Err(MarketError::BudgetViolation { trader: state.id, price: order.price, lo, hi });
    }
    Ok(())
}

fn gains_remain(traders: &[Trader]) -> bool {
    let mut best_value = None;
    let mut best_cost = None;
    for t in traders.iter().filter(|t| t.state.active) {
        let p = t.state.limit_price;
        match t.state.role {
            Role::Buyer => best_value = Some(best_value.map_or(p, |v: Price| v.max(p))),
            Role::Seller => best_cost = Some(best_cost.map_or(p, |c: Price| c.min(p))),
        }
    }
    matches!((best_value, best_cost), (Some(v), Some(c)) if v >= c)
}

fn notify(
    traders: &mut [Trader],
    observers: &[usize],
    event: &MarketEvent,
    quotes: &QuoteState,
    config: &MarketConfig,
    history: &HistoryWindow,
    transactions: &[Transaction],
) {
    if observers.is_empty() {
        return;
    }
    let view = MarketView {
        o_bid: quotes.o_bid,
        o_ask: quotes.o_ask,
        config,
        history,
        is_first_round_of_day: transactions.is_empty(),
    };
    for &i in observers {
        let t = &mut traders[i];
        t.strategy.observe(&t.state, event, &view);
    }
}
