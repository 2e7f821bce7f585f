//! Adaptive-aggressive trader, short-term learning only.
//!
//! Aggressiveness `r ∈ [-1, 1]` picks a target price between the trader's
//! limit and the equilibrium estimate (`r > 0`, more eager to trade) or
//! between the estimate and the far market bound (`r < 0`). Quotes move the
//! outstanding quote a fraction `1/eta` of the way toward the target. After
//! each market event `r` moves toward the aggressiveness whose target would
//! have matched the observed price (Widrow-Hoff rule with rate `beta`).

use rand::RngCore;

use super::bh::{bh_estimate_equilibrium, bh_first_round_ask, bh_first_round_bid};
use super::{snap, MarketEvent, MarketView, Strategy, StrategyKind, StrategyParams};
use crate::market::{Role, Side, TraderState};
use crate::price::Price;

#[derive(Clone, Debug, PartialEq)]
pub struct AaState {
    pub r: f64,
    pub beta: f64,
    pub theta: f64,
    pub eta: f64,
    pub hn: usize,
}

impl AaState {
    pub fn new(params: &StrategyParams) -> Self {
        AaState { r: params.initial_r, beta: params.beta, theta: params.theta, eta: params.eta, hn: params.hn }
    }
}

/// Bounds of the target map for one trader.
#[derive(Clone, Copy, Debug)]
struct TargetRange {
    role: Role,
    limit: f64,
    p_hat: f64,
    min_bid: f64,
    max_ask: f64,
}

fn shape(x: f64, theta: f64) -> f64 {
    (x * theta).exp_m1() / theta.exp_m1()
}

fn shape_inv(y: f64, theta: f64) -> f64 {
    (y * theta.exp_m1()).ln_1p() / theta
}

impl TargetRange {
    fn intramarginal(&self) -> bool {
        match self.role {
            Role::Seller => self.limit < self.p_hat,
            Role::Buyer => self.limit > self.p_hat,
        }
    }

    /// Centre and the two ends of the map: (`r = 0`, `r = 1`, `r = -1`).
    fn anchors(&self) -> (f64, f64, f64) {
        let centre = if self.intramarginal() { self.p_hat } else { self.limit };
        match self.role {
            Role::Seller => (centre, self.limit, self.max_ask),
            Role::Buyer => (centre, self.limit, self.min_bid),
        }
    }

    fn target(&self, r: f64, theta: f64) -> f64 {
        let (centre, eager, cautious) = self.anchors();
        if r >= 0.0 {
            centre + (eager - centre) * shape(r, theta)
        } else {
            centre + (cautious - centre) * shape(-r, theta)
        }
    }

    /// Aggressiveness whose target is `price`, clamped to [-1, 1].
    fn aggressiveness_for(&self, price: f64, theta: f64) -> f64 {
        let (centre, eager, cautious) = self.anchors();
        let toward_eager = (price - centre) * (eager - centre) > 0.0;
        if toward_eager {
            let y = ((price - centre) / (eager - centre)).min(1.0);
            shape_inv(y, theta)
        } else if (cautious - centre).abs() > 0.0 {
            let y = ((price - centre) / (cautious - centre)).clamp(0.0, 1.0);
            -shape_inv(y, theta)
        } else {
            0.0
        }
    }
}

fn range(me: &TraderState, view: &MarketView<'_>, p_hat: f64) -> TargetRange {
    TargetRange {
        role: me.role,
        limit: me.limit_price.to_f64(),
        p_hat,
        min_bid: view.config.min_bid.to_f64(),
        max_ask: view.config.max_ask.to_f64(),
    }
}

/// Target price for aggressiveness `r` given the equilibrium estimate.
pub fn aa_target(me: &TraderState, view: &MarketView<'_>, p_hat: f64, r: f64, theta: f64) -> f64 {
    range(me, view, p_hat).target(r.clamp(-1.0, 1.0), theta)
}

pub fn aa_quote(me: &TraderState, view: &MarketView<'_>, state: &AaState) -> Option<Price> {
    let (lo, hi) = view.feasible_interval(me)?;
    let p_hat = bh_estimate_equilibrium(view.history, state.hn);
    let limit = me.limit_price.to_f64();
    if p_hat == 0.0 {
        let x = match me.role {
            Role::Seller => bh_first_round_ask(limit, view, state.eta),
            Role::Buyer => bh_first_round_bid(limit, view, state.eta),
        };
        return Some(snap(x, lo, hi));
    }
    let tau = aa_target(me, view, p_hat, state.r, state.theta);
    let (o_bid, o_ask) = (view.o_bid.to_f64(), view.o_ask.to_f64());
    match me.role {
        Role::Seller => {
            if view.o_bid > Price::ZERO && o_bid >= tau && view.o_bid >= me.limit_price {
                // hit the standing bid
                Some(view.o_bid.clamp(lo, hi))
            } else if tau < o_ask {
                Some(snap(o_ask - (o_ask - tau) / state.eta, lo, hi))
            } else {
                None
            }
        }
        Role::Buyer => {
            if view.o_ask < view.config.max_ask && o_ask <= tau && view.o_ask <= me.limit_price {
                Some(view.o_ask.clamp(lo, hi))
            } else if tau > o_bid {
                Some(snap(o_bid + (tau - o_bid) / state.eta, lo, hi))
            } else {
                None
            }
        }
    }
}

/// Relative and absolute overshoot of the update target, so that `r` can
/// move past the aggressiveness that merely matches an observed price.
const LAMBDA_R: f64 = 0.05;
const LAMBDA_A: f64 = 0.01;

/// Moves `r` toward an aggressiveness derived from the event's price.
///
/// A transaction makes the trader less aggressive when its target was
/// already at least as good as the price, and more aggressive otherwise.
/// A same-side quote the target fails to beat makes it more aggressive.
/// Opposite-side quotes are ignored.
pub fn aa_update(state: &mut AaState, me: &TraderState, event: &MarketEvent, view: &MarketView<'_>) {
    let p_hat = bh_estimate_equilibrium(view.history, state.hn);
    if p_hat == 0.0 {
        return;
    }
    let range = range(me, view, p_hat);
    let tau = range.target(state.r, state.theta);
    // true: toward more aggressive
    let (price, eager) = match (*event, me.role) {
        (MarketEvent::Trade { price }, Role::Buyer) => (price.to_f64(), tau < price.to_f64()),
        (MarketEvent::Trade { price }, Role::Seller) => (price.to_f64(), tau > price.to_f64()),
        (MarketEvent::Order { side: Side::Bid, price }, Role::Buyer) if tau <= price.to_f64() => (price.to_f64(), true),
        (MarketEvent::Order { side: Side::Ask, price }, Role::Seller) if tau >= price.to_f64() => {
            (price.to_f64(), true)
        }
        _ => return,
    };
    let matched = range.aggressiveness_for(price, state.theta);
    let desired = if eager { (1.0 + LAMBDA_R) * matched + LAMBDA_A } else { (1.0 - LAMBDA_R) * matched - LAMBDA_A };
    state.r = (state.r + state.beta * (desired - state.r)).clamp(-1.0, 1.0);
}

#[derive(Clone, Debug)]
pub struct AaStrategy {
    state: AaState,
}

impl AaStrategy {
    pub fn new(params: &StrategyParams) -> Self {
        AaStrategy { state: AaState::new(params) }
    }

    pub fn state(&self) -> &AaState {
        &self.state
    }
}

impl Strategy for AaStrategy {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Aa
    }

    fn quote(&mut self, me: &TraderState, view: &MarketView<'_>, _rng: &mut dyn RngCore) -> Option<Price> {
        aa_quote(me, view, &self.state)
    }

    fn observes_market(&self) -> bool {
        true
    }

    fn observe(&mut self, me: &TraderState, event: &MarketEvent, view: &MarketView<'_>) {
        aa_update(&mut self.state, me, event, view);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{HistoryWindow, MarketConfig, TradePrint};

    fn p(x: f64) -> Price {
        Price::from_f64(x)
    }

    fn cfg() -> MarketConfig {
        MarketConfig::new(1000, Price::ZERO, Price::from_units(100), Price::ZERO)
    }

    fn history_at(price: f64) -> HistoryWindow {
        HistoryWindow::from_parts(Vec::new(), vec![TradePrint { price: p(price), step: 0 }])
    }

    fn view<'a>(cfg: &'a MarketConfig, h: &'a HistoryWindow) -> MarketView<'a> {
        MarketView { o_bid: Price::ZERO, o_ask: cfg.max_ask, config: cfg, history: h, is_first_round_of_day: false }
    }

    #[test]
    fn neutral_and_extreme_targets() {
        let cfg = cfg();
        let h = history_at(6.0);
        let v = view(&cfg, &h);
        let seller = TraderState::new(0, Role::Seller, p(2.0), StrategyKind::Aa);
        assert!((aa_target(&seller, &v, 6.0, 0.0, 2.0) - 6.0).abs() < 1e-12);
        assert!((aa_target(&seller, &v, 6.0, 1.0, 2.0) - 2.0).abs() < 1e-12);
        assert!((aa_target(&seller, &v, 6.0, -1.0, 2.0) - 100.0).abs() < 1e-9);
        let buyer = TraderState::new(1, Role::Buyer, p(9.0), StrategyKind::Aa);
        assert!((aa_target(&buyer, &v, 6.0, 0.0, 2.0) - 6.0).abs() < 1e-12);
        assert!((aa_target(&buyer, &v, 6.0, 1.0, 2.0) - 9.0).abs() < 1e-12);
        assert!((aa_target(&buyer, &v, 6.0, -1.0, 2.0) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn target_map_is_monotone() {
        let cfg = cfg();
        let h = history_at(6.0);
        let v = view(&cfg, &h);
        let seller = TraderState::new(0, Role::Seller, p(2.0), StrategyKind::Aa);
        let mut last = f64::INFINITY;
        for k in -10..=10 {
            let t = aa_target(&seller, &v, 6.0, k as f64 / 10.0, 2.0);
            assert!(t < last);
            last = t;
        }
    }

    #[test]
    fn updates_settle_around_the_matching_aggressiveness() {
        let cfg = cfg();
        let h = history_at(6.0);
        let v = view(&cfg, &h);
        let seller = TraderState::new(0, Role::Seller, p(2.0), StrategyKind::Aa);
        let params = StrategyParams { beta: 0.5, ..Default::default() };
        let mut state = AaState::new(&params);
        let trade = MarketEvent::Trade { price: p(4.0) };
        // independent oracle: bisection on the target map
        let (mut a, mut b) = (-1.0_f64, 1.0_f64);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if aa_target(&seller, &v, 6.0, m, 2.0) > 4.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let r_star = 0.5 * (a + b);
        // the target sat above the trade price, so the first step is eager
        aa_update(&mut state, &seller, &trade, &v);
        assert!((state.r - 0.5 * ((1.0 + LAMBDA_R) * r_star + LAMBDA_A)).abs() < 1e-12);
        for _ in 0..200 {
            aa_update(&mut state, &seller, &trade, &v);
        }
        let band = (1.0 - LAMBDA_R) * r_star - LAMBDA_A..=(1.0 + LAMBDA_R) * r_star + LAMBDA_A;
        assert!(band.contains(&state.r), "r = {}, r* = {r_star}", state.r);
    }

    #[test]
    fn outbid_buyer_becomes_more_aggressive() {
        let cfg = cfg();
        let h = history_at(6.0);
        let v = view(&cfg, &h);
        let buyer = TraderState::new(1, Role::Buyer, p(9.0), StrategyKind::Aa);
        let mut state = AaState::new(&StrategyParams::default());
        aa_update(&mut state, &buyer, &MarketEvent::Order { side: Side::Bid, price: p(6.0) }, &v);
        assert!(state.r > 0.0);
        let r = state.r;
        aa_update(&mut state, &buyer, &MarketEvent::Order { side: Side::Ask, price: p(7.0) }, &v);
        aa_update(&mut state, &buyer, &MarketEvent::Order { side: Side::Bid, price: p(1.0) }, &v);
        assert_eq!(state.r, r);
    }

    #[test]
    fn r_stays_bounded() {
        let cfg = cfg();
        let h = history_at(6.0);
        let v = view(&cfg, &h);
        let buyer = TraderState::new(1, Role::Buyer, p(9.0), StrategyKind::Aa);
        let mut state = AaState::new(&StrategyParams { beta: 1.0, ..Default::default() });
        for price in [0.0, 100.0, 9.0, 50.0, 0.5] {
            aa_update(&mut state, &buyer, &MarketEvent::Trade { price: p(price) }, &v);
            assert!((-1.0..=1.0).contains(&state.r));
        }
    }

    #[test]
    fn first_round_uses_damped_step() {
        let cfg = cfg();
        let h = HistoryWindow::default();
        let v = view(&cfg, &h);
        let seller = TraderState::new(0, Role::Seller, p(10.0), StrategyKind::Aa);
        let state = AaState::new(&StrategyParams::default());
        assert_eq!(aa_quote(&seller, &v, &state), Some(p(70.0)));
    }
}
