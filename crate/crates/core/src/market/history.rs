use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Side, TraderId};
use crate::price::Price;

/// An accepted order as remembered by the public history. `taken` is set
/// when the order was one of the two standing quotes consumed by a
/// settlement; orders of a round that closed without them being matched are
/// rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordedOrder {
    pub side: Side,
    pub price: Price,
    pub taken: bool,
}

impl RecordedOrder {
    pub fn new(side: Side, price: Price, taken: bool) -> Self {
        RecordedOrder { side, price, taken }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradePrint {
    pub price: Price,
    pub step: u32,
}

/// Public market history: accepted orders of the last `round_capacity`
/// completed rounds, and every transaction print of the current day.
#[derive(Clone, Debug, Default)]
pub struct HistoryWindow {
    rounds: VecDeque<Vec<RecordedOrder>>,
    round_capacity: usize,
    current: Vec<(TraderId, RecordedOrder)>,
    transactions: Vec<TradePrint>,
}

impl HistoryWindow {
    pub fn new(round_capacity: usize) -> Self {
        HistoryWindow { round_capacity: round_capacity.max(1), ..Default::default() }
    }

    /// A window holding one completed round made of `orders`, with the given
    /// transaction prints.
    pub fn from_parts(orders: Vec<RecordedOrder>, transactions: Vec<TradePrint>) -> Self {
        let mut rounds = VecDeque::new();
        if !orders.is_empty() {
            rounds.push_back(orders);
        }
        HistoryWindow { rounds, round_capacity: usize::MAX, current: Vec::new(), transactions }
    }

    pub fn from_orders(orders: Vec<RecordedOrder>) -> Self {
        Self::from_parts(orders, Vec::new())
    }

    pub fn record_order(&mut self, trader: TraderId, side: Side, price: Price) {
        self.current.push((trader, RecordedOrder::new(side, price, false)));
    }

    /// Closes the current round. When it ended in a settlement, the latest
    /// bid of `buyer` and the latest ask of `seller` are marked taken.
    pub fn close_round(&mut self, settled: Option<(TraderId, TraderId)>) {
        let mut orders = std::mem::take(&mut self.current);
        if let Some((buyer, seller)) = settled {
            mark_last(&mut orders, buyer, Side::Bid);
            mark_last(&mut orders, seller, Side::Ask);
        }
        if orders.is_empty() {
            return;
        }
        self.rounds.push_back(orders.into_iter().map(|(_, o)| o).collect());
        while self.rounds.len() > self.round_capacity {
            self.rounds.pop_front();
        }
    }

    pub fn record_transaction(&mut self, price: Price, step: u32) {
        self.transactions.push(TradePrint { price, step });
    }

    /// Orders of the completed rounds in the window, oldest first.
    pub fn orders(&self) -> impl Iterator<Item = &RecordedOrder> + '_ {
        self.rounds.iter().flatten()
    }

    pub fn order_count(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }

    pub fn completed_rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn transactions(&self) -> &[TradePrint] {
        &self.transactions
    }

    /// Up to `n` most recent transaction prices, oldest first.
    pub fn latest_prices(&self, n: usize) -> impl Iterator<Item = Price> + '_ {
        let start = self.transactions.len().saturating_sub(n);
        self.transactions[start..].iter().map(|t| t.price)
    }
}

fn mark_last(orders: &mut [(TraderId, RecordedOrder)], trader: TraderId, side: Side) {
    if let Some((_, o)) = orders.iter_mut().rev().find(|(id, o)| *id == trader && o.side == side) {
        o.taken = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settlement_marks_standing_quotes_taken() {
        let mut h = HistoryWindow::new(2);
        h.record_order(1, Side::Bid, Price::from_units(2));
        h.record_order(2, Side::Ask, Price::from_units(9));
        h.record_order(1, Side::Bid, Price::from_units(3));
        h.record_order(3, Side::Ask, Price::from_units(3));
        h.close_round(Some((1, 3)));
        let taken: Vec<_> = h.orders().map(|o| (o.price.to_f64(), o.taken)).collect();
        assert_eq!(taken, vec![(2.0, false), (9.0, false), (3.0, true), (3.0, true)]);
    }

    #[test]
    fn window_keeps_latest_rounds() {
        let mut h = HistoryWindow::new(2);
        for r in 1..=3 {
            h.record_order(0, Side::Bid, Price::from_units(r));
            h.close_round(None);
        }
        assert_eq!(h.completed_rounds(), 2);
        let prices: Vec<_> = h.orders().map(|o| o.price.to_f64()).collect();
        assert_eq!(prices, vec![2.0, 3.0]);
    }

    #[test]
    fn latest_prices_window() {
        let mut h = HistoryWindow::new(1);
        for (i, x) in [10, 20, 30].iter().enumerate() {
            h.record_transaction(Price::from_units(*x), i as u32);
        }
        let last2: Vec<_> = h.latest_prices(2).map(Price::to_f64).collect();
        assert_eq!(last2, vec![20.0, 30.0]);
        assert_eq!(h.latest_prices(8).count(), 3);
    }
}
