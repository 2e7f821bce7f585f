use rand::RngCore;

use super::belief::BeliefIndex;
use super::{uniform_price, MarketView, Strategy, StrategyKind};
use crate::market::{Role, TraderState};
use crate::price::Price;

/// Expected-surplus maximizing quote.
///
/// Beliefs are the counting beliefs at every observed order price strictly
/// inside the spread, pinned to 1 at the outstanding opposite quote (meeting
/// it settles at once) and to 0 at the trader's own outstanding quote (a
/// quote there is not accepted), and interpolated linearly in between. When
/// a side has no outstanding quote the counting belief at the market bound
/// takes its place. The pin at the own quote is what keeps the optimum
/// strictly inside the spread instead of one tick past the standing quote.
///
/// On each linear piece the expected surplus is a quadratic, so the
/// candidates are the knots, each piece's vertex and the ends of the
/// feasible improving interval. Abstains when that interval is empty or the
/// best expected surplus is not positive.
pub fn gd_quote(me: &TraderState, view: &MarketView<'_>) -> Option<Price> {
    let (lo, hi) = view.feasible_interval(me)?;
    let index = BeliefIndex::new(view.history);
    let knots = belief_knots(me.role, view, &index);
    let limit = me.limit_price.to_f64();
    let surplus = |x: f64| match me.role {
        Role::Seller => x - limit,
        Role::Buyer => limit - x,
    };
    let expected = |p: Price| surplus(p.to_f64()) * interpolate(&knots, p.to_f64());

    let mut candidates = vec![lo, hi];
    for (i, &(x, y)) in knots.iter().enumerate() {
        candidates.push(Price::from_f64(x));
        if let Some(&(x1, y1)) = knots.get(i + 1) {
            let slope = (y1 - y) / (x1 - x);
            if slope != 0.0 {
                let vertex = 0.5 * (x + limit) - 0.5 * y / slope;
                if vertex.is_finite() && x < vertex && vertex < x1 {
                    candidates.push(Price::from_f64(vertex));
                }
            }
        }
    }

    let mut best: Option<(Price, f64)> = None;
    for p in candidates.into_iter().map(|p| p.clamp(lo, hi)) {
        let v = expected(p);
        if best.is_none_or(|(bp, bv)| v > bv || (v == bv && p < bp)) {
            best = Some((p, v));
        }
    }
    match best {
        Some((p, v)) if v > 0.0 => Some(p),
        _ => None,
    }
}

/// `(price, belief)` knots in ascending price order.
fn belief_knots(role: Role, view: &MarketView<'_>, index: &BeliefIndex) -> Vec<(f64, f64)> {
    let config = view.config;
    let bid_standing = view.o_bid > config.min_bid;
    let ask_standing = view.o_ask < config.max_ask;
    let (low, high) = (view.o_bid.to_f64(), view.o_ask.to_f64());
    let pinned = |standing: bool, x: f64, certain: bool| {
        if standing {
            (x, if certain { 1.0 } else { 0.0 })
        } else {
            (x, index.belief(role, x))
        }
    };
    let (left, right) = match role {
        Role::Seller => (pinned(bid_standing, low, true), pinned(ask_standing, high, false)),
        Role::Buyer => (pinned(bid_standing, low, false), pinned(ask_standing, high, true)),
    };
    let mut knots = vec![left];
    knots.extend(index.prices().iter().filter(|&&x| low < x && x < high).map(|&x| (x, index.belief(role, x))));
    knots.push(right);
    knots
}

/// Piecewise-linear belief; constant beyond the outer knots.
fn interpolate(knots: &[(f64, f64)], x: f64) -> f64 {
    let i = knots.partition_point(|&(k, _)| k <= x);
    if i == 0 {
        return knots[0].1;
    }
    if i == knots.len() {
        return knots[i - 1].1;
    }
    let (x0, y0) = knots[i - 1];
    let (x1, y1) = knots[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// GD trader. Until the public history holds any completed round it quotes
/// uniformly inside its feasible improving interval, since the beliefs have
/// no evidence to act on.
#[derive(Clone, Debug, Default)]
pub struct GdStrategy;

impl GdStrategy {
    pub fn new() -> Self {
        GdStrategy
    }
}

impl Strategy for GdStrategy {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Gd
    }

    fn quote(&mut self, me: &TraderState, view: &MarketView<'_>, rng: &mut dyn RngCore) -> Option<Price> {
        if view.history.order_count() == 0 {
            let (lo, hi) = view.feasible_interval(me)?;
            return Some(uniform_price(rng, lo, hi));
        }
        gd_quote(me, view)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{HistoryWindow, MarketConfig, RecordedOrder, Side};

    fn cfg() -> MarketConfig {
        MarketConfig::new(1000, Price::ZERO, Price::from_units(100), Price::ZERO)
    }

    fn p(x: f64) -> Price {
        Price::from_f64(x)
    }

    #[test]
    fn empty_history_abstains() {
        let cfg = cfg();
        let h = HistoryWindow::default();
        let view =
            MarketView { o_bid: Price::ZERO, o_ask: p(10.0), config: &cfg, history: &h, is_first_round_of_day: true };
        let seller = TraderState::new(0, Role::Seller, p(2.0), StrategyKind::Gd);
        assert_eq!(gd_quote(&seller, &view), None);
    }

    #[test]
    fn belief_falls_to_zero_at_the_own_standing_quote() {
        let cfg = cfg();
        // counting belief 1 everywhere below the bid at 50, pinned to 0 at the
        // standing ask: (a - 2)(1 - a / 10) peaks at 6
        let h = HistoryWindow::from_orders(vec![RecordedOrder::new(Side::Bid, p(50.0), false)]);
        let view =
            MarketView { o_bid: Price::ZERO, o_ask: p(10.0), config: &cfg, history: &h, is_first_round_of_day: false };
        let seller = TraderState::new(0, Role::Seller, p(2.0), StrategyKind::Gd);
        assert_eq!(gd_quote(&seller, &view), Some(p(6.0)));
        // no standing ask: knots (0, 1), (50, 1), (100, 0) and the vertex at 51
        let view = MarketView { o_ask: p(100.0), ..view };
        assert_eq!(gd_quote(&seller, &view), Some(p(51.0)));
    }

    #[test]
    fn buyer_mirror() {
        let cfg = cfg();
        let h = HistoryWindow::from_orders(vec![RecordedOrder::new(Side::Ask, p(1.0), false)]);
        // (9 - b) * (b - 4) / 6 between the standing bid 4 and ask 10 peaks at 6.5
        let view =
            MarketView { o_bid: p(4.0), o_ask: p(10.0), config: &cfg, history: &h, is_first_round_of_day: false };
        let buyer = TraderState::new(0, Role::Buyer, p(9.0), StrategyKind::Gd);
        assert_eq!(gd_quote(&buyer, &view), Some(p(6.5)));
    }

    #[test]
    fn hand_history_optimum() {
        let cfg = cfg();
        let h = HistoryWindow::from_orders(vec![
            RecordedOrder::new(Side::Ask, p(5.0), true),
            RecordedOrder::new(Side::Ask, p(6.0), true),
            RecordedOrder::new(Side::Bid, p(7.0), false),
            RecordedOrder::new(Side::Ask, p(3.0), false),
        ]);
        let view =
            MarketView { o_bid: Price::ZERO, o_ask: p(10.0), config: &cfg, history: &h, is_first_round_of_day: false };
        let seller = TraderState::new(0, Role::Seller, p(2.0), StrategyKind::Gd);
        // (6 - 2) * 2/3 beats (5 - 2) * 3/4, (7 - 2) * 1/2 and every vertex
        assert_eq!(gd_quote(&seller, &view), Some(p(6.0)));
    }

    #[test]
    fn hits_the_outstanding_bid_when_certain_surplus_wins() {
        let cfg = cfg();
        let h = HistoryWindow::from_orders(vec![
            RecordedOrder::new(Side::Ask, p(5.0), true),
            RecordedOrder::new(Side::Ask, p(6.0), true),
            RecordedOrder::new(Side::Bid, p(7.0), false),
            RecordedOrder::new(Side::Ask, p(3.0), false),
        ]);
        let seller = TraderState::new(0, Role::Seller, p(2.0), StrategyKind::Gd);
        let view =
            MarketView { o_bid: p(4.0), o_ask: p(10.0), config: &cfg, history: &h, is_first_round_of_day: false };
        // 4 - 2 with certainty loses to (6 - 2) * 2/3
        assert_eq!(gd_quote(&seller, &view), Some(p(6.0)));
        // 5 - 2 with certainty wins
        let view = MarketView { o_bid: p(5.0), ..view };
        assert_eq!(gd_quote(&seller, &view), Some(p(5.0)));
    }
}
