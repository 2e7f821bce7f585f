//! Evaluation criteria for a trading day and their aggregation.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::market::{DayResult, Role};
use crate::oracle::MpAllocation;
use crate::price::Price;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DayMetrics {
    pub transactions: usize,
    pub buyer_surplus: Price,
    pub seller_surplus: Price,
    pub total_surplus: Price,
    /// Market efficiency with surpluses scaled by the largest per-trader
    /// win count on each side. `None` when the benchmark has no surplus.
    pub efficiency: Option<f64>,
    /// Plain ratio of realized to benchmark total surplus, for comparison.
    pub raw_efficiency: Option<f64>,
    /// Daily price volatility around the benchmark price.
    pub alpha: Option<f64>,
    pub mp_trades: usize,
    pub p_mp: Option<Price>,
    pub decision_time: Duration,
}

/// Market efficiency of a day against its benchmark allocation:
/// the mean of the buyers' ratio `Σ S_b,i / n_b / Σ S^MP_b` and the
/// sellers' ratio `Σ S_s,j / n_s / Σ S^MP_s`, where `n_b` and `n_s` are the
/// largest numbers of wins of a single buyer and seller that day.
///
/// `None` when either side of the benchmark has zero surplus. A day with
/// no transactions has efficiency 0.
pub fn market_efficiency(day: &DayResult, mp: &MpAllocation) -> Option<f64> {
    if mp.total_buyer_surplus <= Price::ZERO || mp.total_seller_surplus <= Price::ZERO {
        return None;
    }
    let side = |role: Role, benchmark: Price| {
        let traders = day.traders.iter().filter(|t| t.role == role);
        let max_wins = traders.clone().map(|t| t.wins).max().unwrap_or(0);
        if max_wins == 0 {
            return 0.0;
        }
        let realized: f64 = traders.map(|t| t.surplus.to_f64() / max_wins as f64).sum();
        realized / benchmark.to_f64()
    };
    Some((side(Role::Buyer, mp.total_buyer_surplus) + side(Role::Seller, mp.total_seller_surplus)) / 2.0)
}

/// Realized total surplus over benchmark total surplus.
pub fn raw_efficiency(day: &DayResult, mp: &MpAllocation) -> Option<f64> {
    let benchmark = mp.total_surplus();
    (benchmark > Price::ZERO).then(|| day.total_surplus().to_f64() / benchmark.to_f64())
}

/// `(1 / p_mp) * sqrt(Σ (p_i - p_mp)^2 / N)`; `None` without prices or
/// without a positive benchmark price.
pub fn price_volatility(prices: &[Price], p_mp: Option<Price>) -> Option<f64> {
    let p_mp = p_mp.filter(|p| *p > Price::ZERO)?.to_f64();
    if prices.is_empty() {
        return None;
    }
    let mse = prices.iter().map(|p| (p.to_f64() - p_mp).powi(2)).sum::<f64>() / prices.len() as f64;
    Some(mse.sqrt() / p_mp)
}

pub fn day_metrics(day: &DayResult, mp: &MpAllocation) -> DayMetrics {
    let buyer_surplus = day.buyer_surplus();
    let seller_surplus = day.seller_surplus();
    let p_mp = mp.p_mp();
    DayMetrics {
        transactions: day.transactions.len(),
        buyer_surplus,
        seller_surplus,
        total_surplus: buyer_surplus + seller_surplus,
        efficiency: market_efficiency(day, mp),
        raw_efficiency: raw_efficiency(day, mp),
        alpha: price_volatility(&day.prices(), p_mp),
        mp_trades: mp.trades(),
        p_mp,
        decision_time: day.decision_time,
    }
}

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len();
        if n == 0 {
            return Stat { n: 0, mean: f64::NAN, std: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std =
            if n < 2 { 0.0 } else { (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() };
        Stat { n, mean, std }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub days: usize,
    pub transactions: Stat,
    pub buyer_surplus: Stat,
    pub seller_surplus: Stat,
    pub total_surplus: Stat,
    pub efficiency: Stat,
    pub raw_efficiency: Stat,
    pub alpha: Stat,
    pub decision_ms: Stat,
    /// Days left out of the efficiency average (no benchmark surplus).
    pub efficiency_skipped: usize,
    /// Days left out of the volatility average (no transaction or no benchmark price).
    pub alpha_skipped: usize,
}

/// Aggregates day metrics. Days whose efficiency or volatility is undefined
/// are excluded from that average and counted separately.
pub fn summarize(days: &[DayMetrics]) -> SummaryStats {
    let col = |f: &dyn Fn(&DayMetrics) -> f64| Stat::of(&days.iter().map(f).collect::<Vec<_>>());
    let efficiencies: Vec<f64> = days.iter().filter_map(|d| d.efficiency).collect();
    let raw: Vec<f64> = days.iter().filter_map(|d| d.raw_efficiency).collect();
    let alphas: Vec<f64> = days.iter().filter_map(|d| d.alpha).collect();
    SummaryStats {
        days: days.len(),
        transactions: col(&|d| d.transactions as f64),
        buyer_surplus: col(&|d| d.buyer_surplus.to_f64()),
        seller_surplus: col(&|d| d.seller_surplus.to_f64()),
        total_surplus: col(&|d| d.total_surplus.to_f64()),
        efficiency: Stat::of(&efficiencies),
        raw_efficiency: Stat::of(&raw),
        alpha: Stat::of(&alphas),
        decision_ms: col(&|d| d.decision_time.as_secs_f64() * 1e3),
        efficiency_skipped: days.len() - efficiencies.len(),
        alpha_skipped: days.len() - alphas.len(),
    }
}
