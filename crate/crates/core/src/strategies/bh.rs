//! Belief-based hybrid strategy.
//!
//! A trader first estimates the equilibrium price from recent transaction
//! prices. On its own side of that estimate (asks above it, bids below it)
//! it is aggressive and maximizes expected surplus against a cubic belief
//! fitted to the order history; past it, it concedes with a uniform draw
//! between its limit and the outstanding quote. Before the day's first
//! transaction it closes a fixed fraction `1/eta` of the gap between the
//! outstanding quote and its target.

use rand::{Rng, RngCore};

use super::belief::{best_response, fit_beliefs, BeliefModel};
use super::{snap, uniform_price, MarketView, Strategy, StrategyKind, StrategyParams};
use crate::market::{HistoryWindow, Role, TraderState};
use crate::price::Price;

/// Weighted moving average of the latest `hn` transaction prices, weights
/// `1..=k` from oldest to newest over the `k ≤ hn` prices available.
/// Zero when there has been no transaction.
pub fn bh_estimate_equilibrium(history: &HistoryWindow, hn: usize) -> f64 {
    let mut weighted = 0.0;
    let mut weights = 0.0;
    for (i, p) in history.latest_prices(hn).enumerate() {
        let w = (i + 1) as f64;
        weighted += w * p.to_f64();
        weights += w;
    }
    if weights == 0.0 {
        0.0
    } else {
        weighted / weights
    }
}

pub fn bh_fit_beliefs(
    history: &HistoryWindow,
    p_hat: f64,
    role: Role,
    view: &MarketView<'_>,
    grid: usize,
) -> BeliefModel {
    fit_beliefs(history, p_hat, role, view.config.min_bid.to_f64(), view.config.max_ask.to_f64(), grid)
}

/// Best aggressive ask in `[max(C, p̂*), o_ask)`. The lower end is the grid
/// point at or below p̂*, where the belief is still 1.
pub fn bh_best_ask(cost: Price, model: &BeliefModel, view: &MarketView<'_>, search_grid: usize) -> Option<Price> {
    let lo = cost.max(Price::floor_f64(model.split()));
    let hi = (view.o_ask - view.config.improvement_step()).min(view.config.max_ask);
    if lo > hi {
        return None;
    }
    let x = best_response(model, cost.to_f64(), lo.to_f64(), hi.to_f64(), search_grid)?;
    Some(snap(x, lo, hi))
}

/// Best aggressive bid in `(o_bid, min(V, p̂*)]`, the upper end rounded up
/// to the grid for the same reason.
pub fn bh_best_bid(value: Price, model: &BeliefModel, view: &MarketView<'_>, search_grid: usize) -> Option<Price> {
    let lo = (view.o_bid + view.config.improvement_step()).max(view.config.min_bid);
    let hi = value.min(Price::ceil_f64(model.split()));
    if lo > hi {
        return None;
    }
    let x = best_response(model, value.to_f64(), lo.to_f64(), hi.to_f64(), search_grid)?;
    Some(snap(x, lo, hi))
}

/// Uniform ask on `(C, o_ask)`.
pub fn bh_unaggressive_ask<R: Rng + ?Sized>(cost: Price, view: &MarketView<'_>, rng: &mut R) -> Option<Price> {
    let hi = (view.o_ask - view.config.improvement_step()).min(view.config.max_ask);
    (cost <= hi).then(|| uniform_price(rng, cost, hi))
}

/// Uniform bid on `(o_bid, V)`.
pub fn bh_unaggressive_bid<R: Rng + ?Sized>(value: Price, view: &MarketView<'_>, rng: &mut R) -> Option<Price> {
    let lo = (view.o_bid + view.config.improvement_step()).max(view.config.min_bid);
    (lo <= value).then(|| uniform_price(rng, lo, value))
}

/// `o_ask - (o_ask - max(C, o_bid)) / eta`
pub fn bh_first_round_ask(cost: f64, view: &MarketView<'_>, eta: f64) -> f64 {
    let o_ask = view.o_ask.to_f64();
    o_ask - (o_ask - cost.max(view.o_bid.to_f64())) / eta
}

/// `o_bid + (min(V, o_ask) - o_bid) / eta`
pub fn bh_first_round_bid(value: f64, view: &MarketView<'_>, eta: f64) -> f64 {
    let o_bid = view.o_bid.to_f64();
    o_bid + (value.min(view.o_ask.to_f64()) - o_bid) / eta
}

/// Stage of a BH decision, exposed for tests and diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BhStage {
    Abstain,
    FirstRound,
    Aggressive,
    Unaggressive,
}

pub fn bh_stage(me: &TraderState, view: &MarketView<'_>, p_hat: f64) -> BhStage {
    match me.role {
        Role::Seller if me.limit_price >= view.o_ask => BhStage::Abstain,
        Role::Buyer if me.limit_price <= view.o_bid => BhStage::Abstain,
        _ if p_hat == 0.0 => BhStage::FirstRound,
        Role::Seller if view.o_ask.to_f64() > p_hat => BhStage::Aggressive,
        Role::Buyer if view.o_bid.to_f64() < p_hat => BhStage::Aggressive,
        _ => BhStage::Unaggressive,
    }
}

pub fn bh_decide<R: Rng + ?Sized>(
    me: &TraderState,
    view: &MarketView<'_>,
    params: &StrategyParams,
    rng: &mut R,
) -> Option<Price> {
    let p_hat = bh_estimate_equilibrium(view.history, params.hn);
    let (lo, hi) = view.feasible_interval(me)?;
    match bh_stage(me, view, p_hat) {
        BhStage::Abstain => None,
        BhStage::FirstRound => {
            let x = match me.role {
                Role::Seller => bh_first_round_ask(me.limit_price.to_f64(), view, params.eta),
                Role::Buyer => bh_first_round_bid(me.limit_price.to_f64(), view, params.eta),
            };
            Some(snap(x, lo, hi))
        }
        BhStage::Aggressive => {
            let model = bh_fit_beliefs(view.history, p_hat, me.role, view, params.fit_grid);
            match me.role {
                Role::Seller => bh_best_ask(me.limit_price, &model, view, params.search_grid),
                Role::Buyer => bh_best_bid(me.limit_price, &model, view, params.search_grid),
            }
        }
        BhStage::Unaggressive => match me.role {
            Role::Seller => bh_unaggressive_ask(me.limit_price, view, rng),
            Role::Buyer => bh_unaggressive_bid(me.limit_price, view, rng),
        },
    }
}

#[derive(Clone, Debug)]
pub struct BhStrategy {
    params: StrategyParams,
}

impl BhStrategy {
    pub fn new(params: &StrategyParams) -> Self {
        BhStrategy { params: params.clone() }
    }
}

impl Strategy for BhStrategy {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Bh
    }

    fn quote(&mut self, me: &TraderState, view: &MarketView<'_>, rng: &mut dyn RngCore) -> Option<Price> {
        bh_decide(me, view, &self.params, rng)
    }
}
