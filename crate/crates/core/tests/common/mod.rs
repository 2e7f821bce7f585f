//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::collections::HashMap;

use cda_core::market::{
    run_trading_day, DayResult, HistoryWindow, MarketConfig, RecordedOrder, Role, Side, Trader, TraderId, TraderState,
    WinnerRemoval,
};
use cda_core::strategies::belief::BeliefModel;
use cda_core::strategies::{bh_best_ask, bh_best_bid, build_strategy, poly, MarketView, StrategyKind, StrategyParams};
use cda_core::Price;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub fn units(xs: &[i64]) -> Vec<Price> {
    xs.iter().map(|&x| Price::from_units(x)).collect()
}

pub fn traders(values: &[Price], costs: &[Price], kind: StrategyKind, params: &StrategyParams) -> Vec<Trader> {
    let limits = values.iter().map(|&v| (Role::Buyer, v)).chain(costs.iter().map(|&c| (Role::Seller, c)));
    limits
        .enumerate()
        .map(|(i, (role, limit))| {
            Trader::new(TraderState::new(i as TraderId, role, limit, kind), build_strategy(kind, params))
        })
        .collect()
}

/// A small random market with its limits and a seed for the trading stream.
#[derive(Clone, Debug)]
pub struct RandomDay {
    pub kind: StrategyKind,
    pub values: Vec<Price>,
    pub costs: Vec<Price>,
    pub config: MarketConfig,
    pub seed: u64,
}

impl RandomDay {
    pub fn draw(rng: &mut impl Rng) -> RandomDay {
        let kind = StrategyKind::ALL[rng.gen_range(0..4)];
        let max_units = [10, 100][rng.gen_range(0..2)];
        let max_ask = Price::from_units(max_units);
        let top = max_units as f64 / 10.0 * rng.gen_range(5.0..10.0);
        let n_b = rng.gen_range(1..=6);
        let n_s = rng.gen_range(1..=6);
        let mut draw = |n: usize| (0..n).map(|_| Price::from_f64(rng.gen_range(0.0..top))).collect::<Vec<_>>();
        let values = draw(n_b);
        let costs = draw(n_s);
        let mut config = MarketConfig::new(rng.gen_range(1..=250), Price::ZERO, max_ask, Price::ZERO);
        if rng.gen_bool(0.2) {
            config.min_increment = Price::from_f64(0.01);
        }
        if rng.gen_bool(0.3) {
            config.winner_removal = WinnerRemoval::Day;
        }
        config.idle_sweep_limit = rng.gen_range(1..=20);
        RandomDay { kind, values, costs, config, seed: rng.gen() }
    }

    pub fn run(&self) -> DayResult {
        let params = StrategyParams::default();
        let mut ts = traders(&self.values, &self.costs, self.kind, &params);
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        run_trading_day(&mut ts, &self.config, params.memory_rounds, &mut rng).expect("valid market")
    }

    pub fn limits(&self) -> HashMap<TraderId, (Role, Price)> {
        self.values
            .iter()
            .map(|&v| (Role::Buyer, v))
            .chain(self.costs.iter().map(|&c| (Role::Seller, c)))
            .enumerate()
            .map(|(i, l)| (i as TraderId, l))
            .collect()
    }
}

/// Every market-rule violation found in a day's logs, checked from the
/// logs alone: quote improvement within rounds, crossing and midpoint
/// settlement, budgets, surplus signs and conservation, step bound, and
/// day-scoped winner removal.
pub fn violations(day: &DayResult, limits: &HashMap<TraderId, (Role, Price)>, config: &MarketConfig) -> Vec<String> {
    let mut out = Vec::new();
    if day.steps > config.length_of_trading_day {
        out.push(format!("{} steps exceed the limit {}", day.steps, config.length_of_trading_day));
    }
    if day.orders.len() != day.steps as usize {
        out.push(format!("{} accepted orders but {} steps", day.orders.len(), day.steps));
    }

    let improves = |side: Side, price: Price, o_bid: Price, o_ask: Price| {
        let d = config.min_increment;
        match side {
            Side::Bid if d == Price::ZERO => price > o_bid,
            Side::Bid => price >= o_bid + d,
            Side::Ask if d == Price::ZERO => price < o_ask,
            Side::Ask => price <= o_ask - d,
        }
    };

    let (mut o_bid, mut o_ask) = (Price::ZERO, config.max_ask);
    let (mut bidder, mut asker): (Option<TraderId>, Option<TraderId>) = (None, None);
    let mut trades = day.transactions.iter().peekable();
    let mut retired: Vec<TraderId> = Vec::new();
    let mut surplus: HashMap<TraderId, (Price, u32)> = HashMap::new();

    for (k, order) in day.orders.iter().enumerate() {
        if order.step != k as u32 {
            out.push(format!("order {k} carries step {}", order.step));
        }
        let Some(&(role, limit)) = limits.get(&order.trader) else {
            out.push(format!("unknown trader {}", order.trader));
            continue;
        };
        if order.side != role.side() {
            out.push(format!("trader {} quoted the wrong side", order.trader));
        }
        let (lo, hi) = match role {
            Role::Buyer => (config.min_bid, limit),
            Role::Seller => (limit, config.max_ask),
        };
        if order.price < lo || order.price > hi {
            out.push(format!("step {k}: {} outside budget [{lo}, {hi}]", order.price));
        }
        if retired.contains(&order.trader) {
            out.push(format!("step {k}: retired trader {} quoted", order.trader));
        }
        if !improves(order.side, order.price, o_bid, o_ask) {
            out.push(format!("step {k}: {:?} {} does not improve ({o_bid}, {o_ask})", order.side, order.price));
        }
        match order.side {
            Side::Bid => (o_bid, bidder) = (order.price, Some(order.trader)),
            Side::Ask => (o_ask, asker) = (order.price, Some(order.trader)),
        }
        let crossed = bidder.is_some() && asker.is_some() && o_bid >= o_ask;
        let settles_here = trades.peek().is_some_and(|t| t.step == order.step);
        if crossed != settles_here {
            out.push(format!("step {k}: crossed = {crossed} but settlement = {settles_here}"));
        }
        if settles_here {
            let t = trades.next().unwrap();
            if Some(t.buyer) != bidder || Some(t.seller) != asker {
                out.push(format!("step {k}: settlement names the wrong traders"));
            }
            if t.bid != o_bid || t.ask != o_ask {
                out.push(format!("step {k}: settlement quotes differ from the book"));
            }
            if t.price + t.price != o_bid + o_ask || t.price < o_ask || t.price > o_bid {
                out.push(format!("step {k}: price {} is not the midpoint of {o_bid} and {o_ask}", t.price));
            }
            let v = limits[&t.buyer].1;
            let c = limits[&t.seller].1;
            if t.buyer_surplus != v - t.price || t.seller_surplus != t.price - c {
                out.push(format!("step {k}: surplus misattributed"));
            }
            if t.buyer_surplus < Price::ZERO || t.seller_surplus < Price::ZERO {
                out.push(format!("step {k}: negative surplus"));
            }
            if t.buyer_surplus + t.seller_surplus != v - c {
                out.push(format!("step {k}: surplus not conserved"));
            }
            for (id, gain) in [(t.buyer, t.buyer_surplus), (t.seller, t.seller_surplus)] {
                let e = surplus.entry(id).or_insert((Price::ZERO, 0));
                e.0 += gain;
                e.1 += 1;
            }
            if config.winner_removal == WinnerRemoval::Day {
                retired.extend([t.buyer, t.seller]);
            }
            (o_bid, o_ask, bidder, asker) = (Price::ZERO, config.max_ask, None, None);
        }
    }
    if trades.next().is_some() {
        out.push("settlement without a crossing order".into());
    }
    for t in &day.traders {
        let (s, w) = surplus.get(&t.id).copied().unwrap_or((Price::ZERO, 0));
        if t.surplus != s || t.wins != w {
            out.push(format!("trader {} totals disagree with the transaction log", t.id));
        }
    }
    out
}

/// Random public history of up to `max_orders` orders priced in `[0, top]`.
pub fn random_history(rng: &mut impl Rng, max_orders: usize, top: f64) -> HistoryWindow {
    let n = rng.gen_range(0..=max_orders);
    let orders = (0..n)
        .map(|_| {
            let side = if rng.gen_bool(0.5) { Side::Bid } else { Side::Ask };
            RecordedOrder::new(side, Price::from_f64(rng.gen_range(0.0..top)), rng.gen_bool(0.3))
        })
        .collect();
    HistoryWindow::from_orders(orders)
}

/// Monomial coefficients `[c3, c2, c1, c0]` of the cubic through four
/// points with abscissae spread over `[lo, hi]` and ordinates in
/// `[-0.3, 1.3]`, so that clamping to [0, 1] is exercised.
pub fn random_cubic(rng: &mut impl Rng, lo: f64, hi: f64) -> [f64; 4] {
    let xs: Vec<f64> = (0..4).map(|k| lo + (hi - lo) * (k as f64 + rng.gen_range(0.1..0.9)) / 4.0).collect();
    let ys: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.3..1.3)).collect();
    let c = poly::least_squares(&xs, &ys, 3).expect("four distinct abscissae");
    [c[3], c[2], c[1], c[0]]
}

/// One randomized best-quote problem: a belief model, a limit price and the
/// outstanding quotes that bound the search interval.
#[derive(Clone, Debug)]
pub struct QuoteCase {
    pub model: BeliefModel,
    pub limit: Price,
    pub o_bid: Price,
    pub o_ask: Price,
}

impl QuoteCase {
    pub fn draw(rng: &mut impl Rng) -> QuoteCase {
        let split = rng.gen_range(1.0..9.0);
        if rng.gen_bool(0.5) {
            let o_ask = Price::from_f64(rng.gen_range(split + 0.1..100.0));
            let limit = Price::from_f64(rng.gen_range(0.0..o_ask.to_f64()));
            let model = BeliefModel::from_coefficients(Role::Seller, split, random_cubic(rng, split, o_ask.to_f64()));
            QuoteCase { model, limit, o_bid: Price::ZERO, o_ask }
        } else {
            let o_bid = Price::from_f64(rng.gen_range(0.0..split - 0.1));
            let limit = Price::from_f64(rng.gen_range(o_bid.to_f64() + 0.1..100.0));
            let model = BeliefModel::from_coefficients(Role::Buyer, split, random_cubic(rng, o_bid.to_f64(), split));
            QuoteCase { model, limit, o_bid, o_ask: Price::from_units(100) }
        }
    }

    fn objective(&self, x: f64) -> f64 {
        let s = match self.model.role() {
            Role::Seller => x - self.limit.to_f64(),
            Role::Buyer => self.limit.to_f64() - x,
        };
        s * self.model.eval(x)
    }

    /// Compares the strategy's best quote with a `cells`-point grid search
    /// over the same interval. The quote passes when it lies within one cell
    /// of the grid optimum, or when its expected surplus is at least the
    /// grid optimum's (distinct near-tied optima).
    pub fn check(&self, cells: usize) -> Result<(), String> {
        let config = MarketConfig::new(1000, Price::ZERO, Price::from_units(100), Price::ZERO);
        let history = HistoryWindow::default();
        let view = MarketView {
            o_bid: self.o_bid,
            o_ask: self.o_ask,
            config: &config,
            history: &history,
            is_first_round_of_day: false,
        };
        let (lo, hi, got) = match self.model.role() {
            Role::Seller => (
                self.limit.max(Price::floor_f64(self.model.split())),
                self.o_ask - Price::TICK,
                bh_best_ask(self.limit, &self.model, &view, 1024),
            ),
            Role::Buyer => (
                self.o_bid + Price::TICK,
                self.limit.min(Price::ceil_f64(self.model.split())),
                bh_best_bid(self.limit, &self.model, &view, 1024),
            ),
        };
        let (lo, hi) = (lo.to_f64(), hi.to_f64());
        if lo > hi {
            return match got {
                None => Ok(()),
                Some(x) => Err(format!("quoted {x} on an empty interval")),
            };
        }
        let cell = (hi - lo) / (cells - 1) as f64;
        let (mut arg, mut best) = (lo, f64::NEG_INFINITY);
        for k in 0..cells {
            let x = lo + cell * k as f64;
            let v = self.objective(x);
            if v > best {
                (arg, best) = (x, v);
            }
        }
        // quotes are snapped to the price grid, which moves the objective by
        // at most a few nano-units of surplus
        let tol = 1e-7;
        match got {
            None if best <= tol => Ok(()),
            None => Err(format!("abstained but the grid finds {best} at {arg}")),
            Some(p) => {
                let x = p.to_f64();
                if x < lo - 1e-9 || x > hi + 1e-9 {
                    return Err(format!("{x} outside [{lo}, {hi}]"));
                }
                let v = self.objective(x);
                if (x - arg).abs() <= cell + 1e-9 || v >= best - tol {
                    Ok(())
                } else {
                    Err(format!("{x} (surplus {v}) vs grid {arg} (surplus {best})"))
                }
            }
        }
    }
}
