use rand::{Rng, RngCore};

use super::{uniform_price, MarketView, Strategy, StrategyKind};
use crate::market::{Role, TraderState};
use crate::price::Price;

/// Zero-intelligence quote: uniform on `[min_bid, V]` for a buyer and on
/// `[C, max_ask]` for a seller, ignoring the outstanding quotes.
pub fn zi_quote<R: Rng + ?Sized>(me: &TraderState, view: &MarketView<'_>, rng: &mut R) -> Price {
    let (lo, hi) = me.budget(view.config);
    uniform_price(rng, lo, hi)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ZiStrategy;

impl Strategy for ZiStrategy {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Zi
    }

    fn quote(&mut self, me: &TraderState, view: &MarketView<'_>, rng: &mut dyn RngCore) -> Option<Price> {
        let (lo, hi) = me.budget(view.config);
        if lo > hi {
            return None;
        }
        let p = zi_quote(me, view, rng);
        debug_assert!(match me.role {
            Role::Buyer => p <= me.limit_price,
            Role::Seller => p >= me.limit_price,
        });
        Some(p)
    }
}
