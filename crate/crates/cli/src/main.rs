use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{ErrorKind, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use cda_core::harness::{
    emit_outputs, load_scenario, read_days, read_provenance, run_experiment, summary_by_strategy, write_summary,
    SUMMARY_FILE,
};
use cda_core::metrics::SummaryStats;
use cda_core::oracle::marshallian_path;
use cda_core::strategies::StrategyKind;
use cda_core::Price;

/// Continuous double auction experiments.
#[derive(Parser)]
#[command(name = "cda", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its logs, metrics and plot series.
    Run {
        /// Preset name (small, large, asymmetric) or path to a TOML scenario.
        #[arg(long, default_value = "small")]
        scenario: String,
        /// zi, gd, aa, bh or all; defaults to the scenario's own list.
        #[arg(long)]
        strategy: Option<String>,
        /// Run seeds 1..=n instead of the scenario's seed list.
        #[arg(long)]
        seeds: Option<u64>,
        /// Override the number of trading days.
        #[arg(long)]
        days: Option<u32>,
        /// Output directory.
        #[arg(long, env = "CDA_OUT_DIR", default_value = "cda-out")]
        out: PathBuf,
    },
    /// Print the Marshallian-path allocation of the listed values and costs (whitespace or commas).
    Oracle {
        #[arg(long)]
        values: PathBuf,
        #[arg(long)]
        costs: PathBuf,
    },
    /// Recompute the summary of an earlier run from its days.csv.
    Report {
        /// Output directory of the earlier run.
        #[arg(long = "in", env = "CDA_OUT_DIR", default_value = "cda-out")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => match std::io::stdout().lock().write_all(text.as_bytes()) {
            // a closed pipe (`cda ... | head`) is not an error
            Err(e) if e.kind() != ErrorKind::BrokenPipe => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
            _ => ExitCode::SUCCESS,
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Executes one command and returns what it prints.
fn run(cli: Cli) -> Result<String> {
    let mut out = String::new();
    match cli.command {
        Command::Run { scenario, strategy, seeds, days, out: dir } => {
            let mut config = load_scenario(&scenario)?;
            if let Some(s) = strategy {
                config.strategies = parse_strategies(&s)?;
            }
            if let Some(n) = seeds {
                if n == 0 {
                    bail!("--seeds must be at least 1");
                }
                config.seeds = (1..=n).collect();
            }
            if let Some(d) = days {
                config.trading_days = d;
            }
            let report = run_experiment(&config)?;
            let files = emit_outputs(&report, &dir)?;
            out += &render_table(&config.name, &report.summary());
            writeln!(out, "wrote {}", files.summary.parent().unwrap_or(&dir).display())?;
        }
        Command::Oracle { values, costs } => {
            let alloc = marshallian_path(&read_prices(&values)?, &read_prices(&costs)?);
            writeln!(out, "trades = {}", alloc.trades())?;
            for (i, (v, c)) in alloc.matches.iter().enumerate() {
                writeln!(out, "pair {} value = {v} cost = {c}", i + 1)?;
            }
            writeln!(out, "total_buyer_surplus = {}", alloc.total_buyer_surplus)?;
            writeln!(out, "total_seller_surplus = {}", alloc.total_seller_surplus)?;
            writeln!(out, "total_surplus = {}", alloc.total_surplus())?;
            match alloc.p_mp() {
                Some(p) => writeln!(out, "p_mp = {p}")?,
                None => writeln!(out, "p_mp = none")?,
            }
        }
        Command::Report { input } => {
            let days = read_days(&input.join("days.csv"))?;
            let provenance = read_provenance(&input.join(SUMMARY_FILE))?;
            let summary = summary_by_strategy(days.iter().map(|d| (d.strategy, &d.metrics)));
            write_summary(&input, &provenance, &summary)?;
            out += &render_table(&provenance.scenario, &summary);
        }
    }
    Ok(out)
}

fn parse_strategies(s: &str) -> Result<Vec<StrategyKind>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(StrategyKind::ALL.to_vec());
    }
    s.split(',').map(|p| p.parse::<StrategyKind>().map_err(Into::into)).collect()
}

fn read_prices(path: &Path) -> Result<Vec<Price>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<Price>().with_context(|| format!("{}: bad price `{t}`", path.display())))
        .collect()
}

fn render_table(scenario: &str, summary: &BTreeMap<StrategyKind, SummaryStats>) -> String {
    let mut out = format!("scenario {scenario}\n");
    out += &format!(
        "{:<8} {:>5} {:>12} {:>10} {:>12} {:>10} {:>10} {:>10}\n",
        "strategy", "days", "trans", "trans_sd", "surplus", "eff", "eff_sd", "alpha"
    );
    for (k, s) in summary {
        out += &format!(
            "{:<8} {:>5} {:>12.2} {:>10.2} {:>12.3} {:>10.4} {:>10.4} {:>10.4}\n",
            k.as_str(),
            s.days,
            s.transactions.mean,
            s.transactions.std,
            s.total_surplus.mean,
            s.efficiency.mean,
            s.efficiency.std,
            s.alpha.mean
        );
    }
    out
}
