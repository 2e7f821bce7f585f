//! Experiment artifacts on disk.
//!
//! | file                | content                                               |
//! |---------------------|-------------------------------------------------------|
//! | `scenario.toml`     | the exact configuration that was run                  |
//! | `transactions.csv`  | every settlement                                      |
//! | `days.csv`          | one row of metrics per `(strategy, seed, day)`        |
//! | `summary.txt`       | provenance and per-strategy statistics, as TOML       |
//! | `summary.csv`       | the comparison table, one row per strategy            |
//! | `plot_daily.csv`    | daily series for charts                               |
//! | `plot_prices.csv`   | the first day's price trajectory with its `p_mp` line |
//!
//! Numbers are written in forms that parse back exactly: prices with nine
//! decimals, floats in shortest round-trip notation, durations in nanoseconds.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{DayRecord, ExperimentReport, HarnessError, Provenance};
use crate::market::DayEnd;
use crate::metrics::{DayMetrics, SummaryStats};
use crate::price::Price;
use crate::strategies::StrategyKind;

pub const SUMMARY_FILE: &str = "summary.txt";
const DAYS_FILE: &str = "days.csv";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputFiles {
    pub scenario: PathBuf,
    pub transactions: PathBuf,
    pub days: PathBuf,
    pub summary: PathBuf,
    pub summary_table: PathBuf,
    pub plot_daily: PathBuf,
    pub plot_prices: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct TransactionRow {
    strategy: StrategyKind,
    seed: u64,
    day: u32,
    round: u64,
    step: u32,
    buyer: u32,
    seller: u32,
    bid: String,
    ask: String,
    price: String,
    buyer_surplus: String,
    seller_surplus: String,
}

#[derive(Serialize, Deserialize)]
struct DayRow {
    strategy: StrategyKind,
    seed: u64,
    day: u32,
    steps: u32,
    end: DayEnd,
    transactions: usize,
    mp_trades: usize,
    buyer_surplus: String,
    seller_surplus: String,
    total_surplus: String,
    p_mp: String,
    efficiency: Option<f64>,
    raw_efficiency: Option<f64>,
    alpha: Option<f64>,
    decision_ns: u64,
}

impl DayRow {
    fn from_record(d: &DayRecord) -> Self {
        let m = &d.metrics;
        DayRow {
            strategy: d.strategy,
            seed: d.seed,
            day: d.day,
            steps: d.steps,
            end: d.end,
            transactions: m.transactions,
            mp_trades: m.mp_trades,
            buyer_surplus: m.buyer_surplus.to_string(),
            seller_surplus: m.seller_surplus.to_string(),
            total_surplus: m.total_surplus.to_string(),
            p_mp: m.p_mp.map(|p| p.to_string()).unwrap_or_default(),
            efficiency: m.efficiency,
            raw_efficiency: m.raw_efficiency,
            alpha: m.alpha,
            decision_ns: m.decision_time.as_nanos() as u64,
        }
    }

    fn into_record(self, path: &Path) -> Result<DayRecord, HarnessError> {
        let price = |s: &str| s.parse::<Price>().map_err(|e| HarnessError::parse(path, e));
        let p_mp = if self.p_mp.is_empty() { None } else { Some(price(&self.p_mp)?) };
        Ok(DayRecord {
            strategy: self.strategy,
            seed: self.seed,
            day: self.day,
            steps: self.steps,
            end: self.end,
            metrics: DayMetrics {
                transactions: self.transactions,
                buyer_surplus: price(&self.buyer_surplus)?,
                seller_surplus: price(&self.seller_surplus)?,
                total_surplus: price(&self.total_surplus)?,
                efficiency: self.efficiency,
                raw_efficiency: self.raw_efficiency,
                alpha: self.alpha,
                mp_trades: self.mp_trades,
                p_mp,
                decision_time: Duration::from_nanos(self.decision_ns),
            },
            transactions: Vec::new(),
        })
    }
}

#[derive(Serialize)]
struct DailyPlotRow {
    strategy: StrategyKind,
    seed: u64,
    day: u32,
    transactions: usize,
    buyer_surplus: f64,
    seller_surplus: f64,
    total_surplus: f64,
    efficiency: Option<f64>,
    alpha: Option<f64>,
}

#[derive(Serialize)]
struct PricePlotRow {
    strategy: StrategyKind,
    seed: u64,
    day: u32,
    index: usize,
    step: u32,
    price: f64,
    p_mp: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct SummaryDocument {
    provenance: Provenance,
    strategies: BTreeMap<StrategyKind, SummaryStats>,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    scenario: &'a str,
    strategy: StrategyKind,
    days: usize,
    transactions_mean: f64,
    transactions_std: f64,
    buyer_surplus_mean: f64,
    seller_surplus_mean: f64,
    total_surplus_mean: f64,
    total_surplus_std: f64,
    efficiency_mean: f64,
    efficiency_std: f64,
    raw_efficiency_mean: f64,
    alpha_mean: f64,
    alpha_std: f64,
    decision_ms_mean: f64,
    efficiency_skipped: usize,
    alpha_skipped: usize,
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, File), HarnessError> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
    Ok((path, file))
}

fn csv_err(path: &Path, e: csv::Error) -> HarnessError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::io(path, io),
        other => HarnessError::parse(path, format!("{other:?}")),
    }
}

fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: impl IntoIterator<Item = T>) -> Result<PathBuf, HarnessError> {
    let (path, file) = create(dir, name)?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(&path, e))?;
    Ok(path)
}

/// Writes every artifact of `report` into `out_dir`, creating it if needed.
pub fn emit_outputs(report: &ExperimentReport, out_dir: &Path) -> Result<OutputFiles, HarnessError> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;

    let (scenario, mut file) = create(out_dir, "scenario.toml")?;
    file.write_all(report.config.to_toml_string().as_bytes()).map_err(|e| HarnessError::io(&scenario, e))?;

    let transactions = write_csv(
        out_dir,
        "transactions.csv",
        report.days.iter().flat_map(|d| {
            d.transactions.iter().map(move |t| TransactionRow {
                strategy: d.strategy,
                seed: d.seed,
                day: d.day,
                round: t.round,
                step: t.step,
                buyer: t.buyer,
                seller: t.seller,
                bid: t.bid.to_string(),
                ask: t.ask.to_string(),
                price: t.price.to_string(),
                buyer_surplus: t.buyer_surplus.to_string(),
                seller_surplus: t.seller_surplus.to_string(),
            })
        }),
    )?;

    let days = write_csv(out_dir, DAYS_FILE, report.days.iter().map(DayRow::from_record))?;

    let plot_daily = write_csv(
        out_dir,
        "plot_daily.csv",
        report.days.iter().map(|d| DailyPlotRow {
            strategy: d.strategy,
            seed: d.seed,
            day: d.day,
            transactions: d.metrics.transactions,
            buyer_surplus: d.metrics.buyer_surplus.to_f64(),
            seller_surplus: d.metrics.seller_surplus.to_f64(),
            total_surplus: d.metrics.total_surplus.to_f64(),
            efficiency: d.metrics.efficiency,
            alpha: d.metrics.alpha,
        }),
    )?;

    // The first recorded day of each strategy.
    let mut firsts: Vec<&DayRecord> = Vec::new();
    for d in &report.days {
        if !firsts.iter().any(|f| f.strategy == d.strategy) {
            firsts.push(d);
        }
    }
    let plot_prices = write_csv(
        out_dir,
        "plot_prices.csv",
        firsts.into_iter().flat_map(|d| {
            d.transactions.iter().enumerate().map(move |(index, t)| PricePlotRow {
                strategy: d.strategy,
                seed: d.seed,
                day: d.day,
                index,
                step: t.step,
                price: t.price.to_f64(),
                p_mp: d.metrics.p_mp.map(Price::to_f64),
            })
        }),
    )?;

    let (summary, summary_table) = write_summary(out_dir, &report.provenance, &report.summary())?;
    Ok(OutputFiles { scenario, transactions, days, summary, summary_table, plot_daily, plot_prices })
}

/// Writes `summary.txt` and `summary.csv`; returns their paths.
pub fn write_summary(
    out_dir: &Path,
    provenance: &Provenance,
    summary: &BTreeMap<StrategyKind, SummaryStats>,
) -> Result<(PathBuf, PathBuf), HarnessError> {
    let doc = SummaryDocument { provenance: provenance.clone(), strategies: summary.clone() };
    let text = toml::to_string(&doc).map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let (path, mut file) = create(out_dir, SUMMARY_FILE)?;
    file.write_all(text.as_bytes()).map_err(|e| HarnessError::io(&path, e))?;

    let table = write_csv(
        out_dir,
        "summary.csv",
        summary.iter().map(|(&strategy, s)| SummaryRow {
            scenario: &provenance.scenario,
            strategy,
            days: s.days,
            transactions_mean: s.transactions.mean,
            transactions_std: s.transactions.std,
            buyer_surplus_mean: s.buyer_surplus.mean,
            seller_surplus_mean: s.seller_surplus.mean,
            total_surplus_mean: s.total_surplus.mean,
            total_surplus_std: s.total_surplus.std,
            efficiency_mean: s.efficiency.mean,
            efficiency_std: s.efficiency.std,
            raw_efficiency_mean: s.raw_efficiency.mean,
            alpha_mean: s.alpha.mean,
            alpha_std: s.alpha.std,
            decision_ms_mean: s.decision_ms.mean,
            efficiency_skipped: s.efficiency_skipped,
            alpha_skipped: s.alpha_skipped,
        }),
    )?;
    Ok((path, table))
}

/// Parses a `days.csv` written by [`emit_outputs`]. Transactions are not
/// part of that table, so the returned records carry none.
pub fn read_days(path: &Path) -> Result<Vec<DayRecord>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize::<DayRow>()
        .map(|row| row.map_err(|e| csv_err(path, e)).and_then(|row| row.into_record(path)))
        .collect()
}

/// Provenance block of a `summary.txt`.
pub fn read_provenance(path: &Path) -> Result<Provenance, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let doc: SummaryDocument = toml::from_str(&text).map_err(|e| HarnessError::parse(path, e))?;
    Ok(doc.provenance)
}
