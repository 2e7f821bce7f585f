//! Marshallian-path benchmark allocation.
//!
//! Pair the highest remaining valuation with the lowest remaining cost for
//! as long as the valuation is at least the cost. Every pair is priced at
//! the midpoint of its value and cost, so each side receives half of the
//! pair's gains from trade; the last pair's midpoint serves as the
//! equilibrium-price proxy.

use serde::{Deserialize, Serialize};

use crate::price::Price;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpAllocation {
    /// `(value, cost)` pairs in trade order.
    pub matches: Vec<(Price, Price)>,
    pub total_buyer_surplus: Price,
    pub total_seller_surplus: Price,
}

impl MpAllocation {
    pub fn trades(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn total_surplus(&self) -> Price {
        self.total_buyer_surplus + self.total_seller_surplus
    }

    pub fn p_mp(&self) -> Option<Price> {
        mp_equilibrium_price(self)
    }
}

pub fn marshallian_path(values: &[Price], costs: &[Price]) -> MpAllocation {
    let mut values = values.to_vec();
    let mut costs = costs.to_vec();
    values.sort_unstable_by(|a, b| b.cmp(a));
    costs.sort_unstable();

    let mut alloc = MpAllocation::default();
    for (&v, &c) in values.iter().zip(&costs) {
        if v < c {
            break;
        }
        let price = Price::midpoint(v, c);
        alloc.total_buyer_surplus += v - price;
        alloc.total_seller_surplus += price - c;
        alloc.matches.push((v, c));
    }
    alloc
}

/// Midpoint of the final matched pair; `None` for an empty allocation.
pub fn mp_equilibrium_price(allocation: &MpAllocation) -> Option<Price> {
    allocation.matches.last().map(|&(v, c)| Price::midpoint(v, c))
}
