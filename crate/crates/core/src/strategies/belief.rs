//! Acceptance beliefs: the history-counting beliefs used by GD, and the
//! piecewise belief model (constant 1 on one side of the equilibrium
//! estimate, fitted cubic on the other) used by BH.

use crate::market::{HistoryWindow, RecordedOrder, Role, Side};
use crate::price::Price;

use super::poly;

/// Estimated probability that an ask at `a` is accepted:
/// (taken asks ≥ a + bids ≥ a) / (taken asks ≥ a + bids ≥ a + rejected asks ≤ a).
/// Zero when the history holds no evidence at `a`.
pub fn gd_belief_ask(a: Price, history: &HistoryWindow) -> f64 {
    let (mut favourable, mut against) = (0u32, 0u32);
    for o in history.orders() {
        match o.side {
            Side::Ask if o.taken && o.price >= a => favourable += 1,
            Side::Ask if !o.taken && o.price <= a => against += 1,
            Side::Bid if o.price >= a => favourable += 1,
            _ => {}
        }
    }
    ratio(favourable, against)
}

/// Estimated probability that a bid at `b` is accepted:
/// (taken bids ≤ b + asks ≤ b) / (taken bids ≤ b + asks ≤ b + rejected bids ≥ b).
pub fn gd_belief_bid(b: Price, history: &HistoryWindow) -> f64 {
    let (mut favourable, mut against) = (0u32, 0u32);
    for o in history.orders() {
        match o.side {
            Side::Bid if o.taken && o.price <= b => favourable += 1,
            Side::Bid if !o.taken && o.price >= b => against += 1,
            Side::Ask if o.price <= b => favourable += 1,
            _ => {}
        }
    }
    ratio(favourable, against)
}

fn ratio(favourable: u32, against: u32) -> f64 {
    let total = favourable + against;
    if total == 0 {
        0.0
    } else {
        favourable as f64 / total as f64
    }
}

/// Sorted view of a history for fast repeated belief evaluation. Agrees
/// exactly with [`gd_belief_ask`] and [`gd_belief_bid`] on grid prices.
#[derive(Clone, Debug, Default)]
pub struct BeliefIndex {
    taken_asks: Vec<f64>,
    rejected_asks: Vec<f64>,
    asks: Vec<f64>,
    taken_bids: Vec<f64>,
    rejected_bids: Vec<f64>,
    bids: Vec<f64>,
    prices: Vec<f64>,
}

impl BeliefIndex {
    pub fn new(history: &HistoryWindow) -> Self {
        Self::from_orders(history.orders())
    }

    pub fn from_orders<'a>(orders: impl IntoIterator<Item = &'a RecordedOrder>) -> Self {
        let mut idx = BeliefIndex::default();
        for o in orders {
            let x = o.price.to_f64();
            match (o.side, o.taken) {
                (Side::Ask, true) => idx.taken_asks.push(x),
                (Side::Ask, false) => idx.rejected_asks.push(x),
                (Side::Bid, true) => idx.taken_bids.push(x),
                (Side::Bid, false) => idx.rejected_bids.push(x),
            }
            match o.side {
                Side::Ask => idx.asks.push(x),
                Side::Bid => idx.bids.push(x),
            }
            idx.prices.push(x);
        }
        for v in [
            &mut idx.taken_asks,
            &mut idx.rejected_asks,
            &mut idx.asks,
            &mut idx.taken_bids,
            &mut idx.rejected_bids,
            &mut idx.bids,
            &mut idx.prices,
        ] {
            v.sort_by(f64::total_cmp);
        }
        idx.prices.dedup();
        idx
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    /// Distinct order prices, ascending.
    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn ask(&self, a: f64) -> f64 {
        let favourable = count_ge(&self.taken_asks, a) + count_ge(&self.bids, a);
        ratio(favourable, count_le(&self.rejected_asks, a))
    }

    pub fn bid(&self, b: f64) -> f64 {
        let favourable = count_le(&self.taken_bids, b) + count_le(&self.asks, b);
        ratio(favourable, count_ge(&self.rejected_bids, b))
    }

    /// Last price with a positive counting belief for `role`: the highest
    /// taken ask or bid for a seller, the lowest taken bid or ask for a
    /// buyer. `None` without such evidence.
    pub fn edge(&self, role: Role) -> Option<f64> {
        match role {
            Role::Seller => self.taken_asks.last().into_iter().chain(self.bids.last()).copied().reduce(f64::max),
            Role::Buyer => self.taken_bids.first().into_iter().chain(self.asks.first()).copied().reduce(f64::min),
        }
    }

    pub fn belief(&self, role: Role, x: f64) -> f64 {
        match role {
            Role::Seller => self.ask(x),
            Role::Buyer => self.bid(x),
        }
    }
}

fn count_ge(sorted: &[f64], x: f64) -> u32 {
    (sorted.len() - sorted.partition_point(|&v| v < x)) as u32
}

fn count_le(sorted: &[f64], x: f64) -> u32 {
    sorted.partition_point(|&v| v <= x) as u32
}

#[derive(Clone, Debug)]
enum Shape {
    /// Cubic in `t = (x - center) / half_width`, ascending coefficients.
    Cubic { center: f64, half_width: f64, coeffs: [f64; 4] },
    /// Not enough distinct points for a cubic: raw counting beliefs.
    Raw(BeliefIndex),
}

/// Piecewise belief around the equilibrium estimate `split`. A seller's
/// belief is 1 for asks at or below the split; a buyer's is 1 for bids at
/// or above it. On the other side the fitted cubic applies, clamped to
/// [0, 1], up to an optional evidence `edge` past which the belief is 0.
#[derive(Clone, Debug)]
pub struct BeliefModel {
    role: Role,
    split: f64,
    edge: Option<f64>,
    shape: Shape,
}

impl BeliefModel {
    /// Model with explicit monomial coefficients `[c3, c2, c1, c0]`, i.e.
    /// `c3 x^3 + c2 x^2 + c1 x + c0`.
    pub fn from_coefficients(role: Role, split: f64, monomial: [f64; 4]) -> Self {
        let [c3, c2, c1, c0] = monomial;
        BeliefModel {
            role,
            split,
            edge: None,
            shape: Shape::Cubic { center: 0.0, half_width: 1.0, coeffs: [c0, c1, c2, c3] },
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn split(&self) -> f64 {
        self.split
    }

    /// Last price with any favourable evidence; the belief is 0 beyond it.
    pub fn edge(&self) -> Option<f64> {
        self.edge
    }

    pub fn is_fitted(&self) -> bool {
        matches!(self.shape, Shape::Cubic { .. })
    }

    /// Monomial coefficients `[c3, c2, c1, c0]` of the fitted branch.
    pub fn coefficients(&self) -> Option<[f64; 4]> {
        match &self.shape {
            Shape::Cubic { center, half_width, coeffs } => {
                let m = poly::unscale(coeffs, *center, *half_width);
                Some([m[3], m[2], m[1], m[0]])
            }
            Shape::Raw(_) => None,
        }
    }

    fn on_constant_branch(&self, x: f64) -> bool {
        match self.role {
            Role::Seller => x <= self.split,
            Role::Buyer => x >= self.split,
        }
    }

    /// Unclamped value of the non-constant branch.
    fn branch(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Cubic { center, half_width, coeffs } => poly::eval(coeffs, (x - center) / half_width),
            Shape::Raw(idx) => idx.belief(self.role, x),
        }
    }

    fn beyond_edge(&self, x: f64) -> bool {
        match (self.role, self.edge) {
            (Role::Seller, Some(e)) => x > e,
            (Role::Buyer, Some(e)) => x < e,
            (_, None) => false,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.on_constant_branch(x) {
            1.0
        } else if self.beyond_edge(x) {
            0.0
        } else {
            self.branch(x).clamp(0.0, 1.0)
        }
    }

    /// Points inside `[lo, hi]` where the expected surplus
    /// `(x - limit) * belief` (seller) or `(limit - x) * belief` (buyer) may
    /// change shape: branch boundaries, clamp crossings and stationary points
    /// of the unclamped quartic.
    fn breakpoints(&self, limit: f64, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend([Some(self.split), self.edge].into_iter().flatten().filter(|x| lo <= *x && *x <= hi));
        match &self.shape {
            Shape::Cubic { center, half_width, coeffs } => {
                let (tl, th) = ((lo - center) / half_width, (hi - center) / half_width);
                let (tl, th) = (tl.min(th), tl.max(th));
                // surplus as a polynomial in t
                let surplus = match self.role {
                    Role::Seller => [center - limit, *half_width],
                    Role::Buyer => [limit - center, -half_width],
                };
                let objective = poly::mul(&surplus, coeffs);
                let mut ts = poly::real_roots_in(&poly::derivative(&objective), tl, th);
                ts.extend(poly::real_roots_in(coeffs, tl, th));
                let mut shifted = coeffs.to_vec();
                shifted[0] -= 1.0;
                ts.extend(poly::real_roots_in(&shifted, tl, th));
                out.extend(ts.into_iter().map(|t| center + half_width * t));
            }
            Shape::Raw(idx) => {
                let tick = Price::TICK.to_f64();
                for &p in idx.prices() {
                    out.extend([p, p - tick, p + tick]);
                }
            }
        }
        out.retain(|&x| lo <= x && x <= hi);
        out
    }
}

/// Fits the belief model for `role` from the order history, split at the
/// equilibrium estimate `split`.
///
/// Sample abscissae are the distinct order prices inside the fitted branch
/// (`(split, max_ask]` for sellers, `[min_bid, split)` for buyers) plus
/// `grid` evenly spaced points of that branch; ordinates are the raw
/// counting beliefs there. Falls back to the raw beliefs when fewer than
/// four distinct abscissae exist.
///
/// The model's edge is the last price with any favourable evidence (the
/// highest ask or bid for sellers, the lowest for buyers). The counting
/// belief is 0 past it, and so is the model, which keeps the cubic's
/// oscillation over the empty tail from inventing acceptance there.
pub fn fit_beliefs(
    history: &HistoryWindow,
    split: f64,
    role: Role,
    min_bid: f64,
    max_ask: f64,
    grid: usize,
) -> BeliefModel {
    let index = BeliefIndex::new(history);
    let edge = index.edge(role);
    let (lo, hi) = match role {
        Role::Seller => (split, max_ask),
        Role::Buyer => (min_bid, split),
    };
    let raw = |index| BeliefModel { role, split, edge, shape: Shape::Raw(index) };
    if hi <= lo {
        return raw(index);
    }
    let inside = |x: f64| match role {
        Role::Seller => x > lo && x <= hi,
        Role::Buyer => x >= lo && x < hi,
    };
    let mut xs: Vec<f64> = index.prices().iter().copied().filter(|&x| inside(x)).collect();
    let n = grid as f64;
    xs.extend((0..grid).map(|k| match role {
        Role::Seller => lo + (hi - lo) * (k + 1) as f64 / n,
        Role::Buyer => lo + (hi - lo) * k as f64 / n,
    }));
    let ys: Vec<f64> = xs.iter().map(|&x| index.belief(role, x)).collect();
    let center = 0.5 * (lo + hi);
    let half_width = 0.5 * (hi - lo);
    let ts: Vec<f64> = xs.iter().map(|&x| (x - center) / half_width).collect();
    match poly::least_squares(&ts, &ys, 3) {
        Some(c) => BeliefModel {
            role,
            split,
            edge,
            shape: Shape::Cubic { center, half_width, coeffs: [c[0], c[1], c[2], c[3]] },
        },
        None => raw(index),
    }
}

/// Maximizes expected surplus `(x - limit) * belief(x)` for a seller, or
/// `(limit - x) * belief(x)` for a buyer, over `[lo, hi]`.
///
/// The maximum is taken over the interval ends, every breakpoint of the
/// objective (see [`BeliefModel`]) and a uniform grid of `grid` points.
/// Returns `None` for an empty interval or when no point has positive
/// expected surplus.
pub fn best_response(model: &BeliefModel, limit: f64, lo: f64, hi: f64, grid: usize) -> Option<f64> {
    if lo.partial_cmp(&hi).is_none_or(|o| o.is_gt()) {
        return None;
    }
    let surplus = |x: f64| match model.role {
        Role::Seller => x - limit,
        Role::Buyer => limit - x,
    };
    let objective = |x: f64| surplus(x) * model.eval(x);
    let mut candidates = vec![lo, hi];
    candidates.extend(model.breakpoints(limit, lo, hi));
    if grid >= 2 {
        candidates.extend((0..grid).map(|k| lo + (hi - lo) * k as f64 / (grid - 1) as f64));
    }
    let mut best = lo;
    let mut best_value = objective(lo);
    for x in candidates {
        let v = objective(x);
        if v > best_value {
            best = x;
            best_value = v;
        }
    }
    (best_value > 0.0).then_some(best)
}
