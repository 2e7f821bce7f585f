//! Seeded multi-day experiments.
//!
//! A [`ScenarioConfig`] fixes the market, the population and the strategies
//! to compare. [`run_experiment`] runs every `(strategy, seed, day)` cell
//! independently and in parallel, then merges results in that order.
//!
//! # Seeding
//!
//! Each cell owns two ChaCha streams whose 32-byte keys are
//! `SHA-256("cda/draws/{seed}/{day}")` and
//! `SHA-256("cda/trade/{strategy}/{seed}/{day}")`. Valuations and costs come
//! from the first stream, so every strategy faces the same draws for a given
//! `(seed, day)`. Any single day can be replayed in isolation with
//! [`run_day`].

mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::market::{
    run_trading_day, DayEnd, MarketConfig, MarketError, Role, Trader, TraderState, Transaction, WinnerRemoval,
};
use crate::metrics::{day_metrics, summarize, DayMetrics, SummaryStats};
use crate::oracle::marshallian_path;
use crate::price::Price;
use crate::strategies::{build_strategy, StrategyKind, StrategyParams};

pub use output::{emit_outputs, read_days, read_provenance, write_summary, OutputFiles, SUMMARY_FILE};

pub const PRESETS: [&str; 3] = ["small", "large", "asymmetric"];

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("unknown scenario preset `{0}` (expected one of small, large, asymmetric)")]
    UnknownPreset(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Market(#[from] MarketError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn parse(path: &Path, message: impl ToString) -> Self {
        HarnessError::Parse { path: path.to_path_buf(), message: message.to_string() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Uniform {
    pub lo: Price,
    pub hi: Price,
}

impl Uniform {
    pub fn new(lo: i64, hi: i64) -> Self {
        Uniform { lo: Price::from_units(lo), hi: Price::from_units(hi) }
    }

    /// One draw; whole units when `integer` is set, otherwise continuous and
    /// rounded to the quote grid.
    pub fn sample<R: Rng>(&self, rng: &mut R, integer: bool) -> Price {
        if self.lo >= self.hi {
            return self.lo;
        }
        if integer {
            let lo = self.lo.to_f64().ceil() as i64;
            let hi = self.hi.to_f64().floor() as i64;
            return Price::from_units(rng.gen_range(lo..=hi));
        }
        Price::from_f64(rng.gen_range(self.lo.to_f64()..=self.hi.to_f64())).clamp(self.lo, self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub n_buyers: u32,
    pub n_sellers: u32,
    pub value_distribution: Uniform,
    pub cost_distribution: Uniform,
    /// Draw whole-unit valuations and costs instead of continuous ones.
    #[serde(default)]
    pub integer_draws: bool,
    pub delta: Price,
    pub min_bid: Price,
    pub max_ask: Price,
    pub steps_per_day: u32,
    pub trading_days: u32,
    /// Each entry is run as its own homogeneous market.
    pub strategies: Vec<StrategyKind>,
    #[serde(default)]
    pub params: StrategyParams,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub winner_removal: WinnerRemoval,
    #[serde(default = "default_idle_sweeps")]
    pub idle_sweep_limit: u32,
}

fn default_idle_sweeps() -> u32 {
    MarketConfig::new(1, Price::ZERO, Price::TICK, Price::ZERO).idle_sweep_limit
}

impl ScenarioConfig {
    pub fn preset(name: &str) -> Result<Self, HarnessError> {
        let (n_buyers, n_sellers, hi, max_ask, steps) = match name {
            "small" => (10, 10, 10, 100, 1_000),
            "large" => (100, 100, 100, 1_000, 10_000),
            "asymmetric" => (1_000, 10, 10, 100, 10_000),
            other => return Err(HarnessError::UnknownPreset(other.to_string())),
        };
        Ok(ScenarioConfig {
            name: name.to_string(),
            n_buyers,
            n_sellers,
            value_distribution: Uniform::new(1, hi),
            cost_distribution: Uniform::new(1, hi),
            integer_draws: false,
            delta: Price::ZERO,
            min_bid: Price::ZERO,
            max_ask: Price::from_units(max_ask),
            steps_per_day: steps,
            trading_days: 30,
            strategies: StrategyKind::ALL.to_vec(),
            params: StrategyParams::default(),
            seeds: vec![1],
            winner_removal: WinnerRemoval::default(),
            idle_sweep_limit: default_idle_sweeps(),
        })
    }

    /// Parses a TOML scenario. When `name` is a preset, the preset supplies
    /// every key the text leaves out (including individual `params` keys);
    /// otherwise all required keys must be present.
    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        let overrides: toml::Table = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
        let base = match overrides.get("name").and_then(|v| v.as_str()) {
            Some(name) if PRESETS.contains(&name) => {
                let preset = ScenarioConfig::preset(name).map_err(|e| e.to_string())?;
                toml::Table::try_from(&preset).map_err(|e| e.to_string())?
            }
            _ => toml::Table::new(),
        };
        let merged = merge(base, overrides);
        let config: ScenarioConfig = merged.try_into().map_err(|e: toml::de::Error| e.to_string())?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn market_config(&self) -> MarketConfig {
        let mut market = MarketConfig::new(self.steps_per_day, self.delta, self.max_ask, self.min_bid);
        market.winner_removal = self.winner_removal;
        market.idle_sweep_limit = self.idle_sweep_limit;
        market
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n_buyers == 0 || self.n_sellers == 0 {
            return Err("n_buyers and n_sellers must be positive".into());
        }
        if self.trading_days == 0 {
            return Err("trading_days must be positive".into());
        }
        if self.strategies.is_empty() {
            return Err("strategies must not be empty".into());
        }
        if self.seeds.is_empty() {
            return Err("seeds must not be empty".into());
        }
        for (label, d) in
            [("value_distribution", self.value_distribution), ("cost_distribution", self.cost_distribution)]
        {
            if d.lo > d.hi {
                return Err(format!("{label}: lo {} exceeds hi {}", d.lo, d.hi));
            }
            if d.lo < self.min_bid || d.hi > self.max_ask {
                return Err(format!("{label} must lie within [min_bid, max_ask]"));
            }
            if self.integer_draws && d.lo.to_f64().ceil() > d.hi.to_f64().floor() {
                return Err(format!("{label} contains no whole unit"));
            }
        }
        self.params.validate()?;
        self.market_config().validate().map_err(|e| e.to_string())
    }

    /// Hex SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.to_toml_string().as_bytes()))
    }
}

fn merge(mut base: toml::Table, overrides: toml::Table) -> toml::Table {
    for (key, value) in overrides {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => {
                let merged = merge(std::mem::take(b), o);
                *b = merged;
            }
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
    base
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Resolves a preset name or a path to a TOML scenario file.
pub fn load_scenario(source: &str) -> Result<ScenarioConfig, HarnessError> {
    if PRESETS.contains(&source) {
        return ScenarioConfig::preset(source);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(HarnessError::UnknownPreset(source.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    ScenarioConfig::from_toml_str(&text).map_err(|e| HarnessError::parse(path, e))
}

fn stream(label: &str) -> ChaCha12Rng {
    ChaCha12Rng::from_seed(Sha256::digest(label.as_bytes()).into())
}

/// Valuations and costs of one `(seed, day)`, shared by all strategies.
pub fn draw_limits(config: &ScenarioConfig, seed: u64, day: u32) -> (Vec<Price>, Vec<Price>) {
    let mut rng = stream(&format!("cda/draws/{seed}/{day}"));
    let values =
        (0..config.n_buyers).map(|_| config.value_distribution.sample(&mut rng, config.integer_draws)).collect();
    let costs =
        (0..config.n_sellers).map(|_| config.cost_distribution.sample(&mut rng, config.integer_draws)).collect();
    (values, costs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DayRecord {
    pub strategy: StrategyKind,
    pub seed: u64,
    pub day: u32,
    pub steps: u32,
    pub end: DayEnd,
    pub metrics: DayMetrics,
    pub transactions: Vec<Transaction>,
}

/// Runs day `day` (0-based) of seed `seed` for one homogeneous market.
pub fn run_day(
    config: &ScenarioConfig,
    strategy: StrategyKind,
    seed: u64,
    day: u32,
) -> Result<DayRecord, HarnessError> {
    let (values, costs) = draw_limits(config, seed, day);
    let mut traders = Vec::with_capacity(values.len() + costs.len());
    let limits = values.iter().map(|&v| (Role::Buyer, v)).chain(costs.iter().map(|&c| (Role::Seller, c)));
    for (id, (role, limit)) in limits.enumerate() {
        let state = TraderState::new(id as u32, role, limit, strategy);
        traders.push(Trader::new(state, build_strategy(strategy, &config.params)));
    }
    let mut rng = stream(&format!("cda/trade/{strategy}/{seed}/{day}"));
    let result = run_trading_day(&mut traders, &config.market_config(), config.params.memory_rounds, &mut rng)?;
    let mp = marshallian_path(&values, &costs);
    Ok(DayRecord {
        strategy,
        seed,
        day,
        steps: result.steps,
        end: result.end,
        metrics: day_metrics(&result, &mp),
        transactions: result.transactions,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub scenario: String,
    pub config_sha256: String,
    pub seeds: Vec<u64>,
    pub code_version: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub config: ScenarioConfig,
    pub provenance: Provenance,
    /// Ordered by strategy (config order), then seed, then day.
    pub days: Vec<DayRecord>,
}

impl ExperimentReport {
    pub fn metrics_for(&self, strategy: StrategyKind, seed: Option<u64>) -> Vec<DayMetrics> {
        self.days
            .iter()
            .filter(|d| d.strategy == strategy && seed.is_none_or(|s| d.seed == s))
            .map(|d| d.metrics.clone())
            .collect()
    }

    pub fn summary(&self) -> BTreeMap<StrategyKind, SummaryStats> {
        summary_by_strategy(self.days.iter().map(|d| (d.strategy, &d.metrics)))
    }
}

pub fn summary_by_strategy<'a>(
    rows: impl Iterator<Item = (StrategyKind, &'a DayMetrics)>,
) -> BTreeMap<StrategyKind, SummaryStats> {
    let mut grouped: BTreeMap<StrategyKind, Vec<DayMetrics>> = BTreeMap::new();
    for (kind, m) in rows {
        grouped.entry(kind).or_default().push(m.clone());
    }
    grouped.into_iter().map(|(k, v)| (k, summarize(&v))).collect()
}

pub fn provenance(config: &ScenarioConfig) -> Provenance {
    Provenance {
        scenario: config.name.clone(),
        config_sha256: config.hash(),
        seeds: config.seeds.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

pub fn run_experiment(config: &ScenarioConfig) -> Result<ExperimentReport, HarnessError> {
    config.validate().map_err(HarnessError::Invalid)?;
    let cells: Vec<(StrategyKind, u64, u32)> = config
        .strategies
        .iter()
        .flat_map(|&k| config.seeds.iter().flat_map(move |&s| (0..config.trading_days).map(move |d| (k, s, d))))
        .collect();
    let days = cells.into_par_iter().map(|(k, s, d)| run_day(config, k, s, d)).collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentReport { config: config.clone(), provenance: provenance(config), days })
}
