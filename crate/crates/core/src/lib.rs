//! Continuous double auction simulator.
//!
//! The [`market`] module enforces the trading rules and runs trading days,
//! [`strategies`] holds the ZI, GD, AA and BH bidding strategies,
//! [`oracle`] computes the Marshallian-path benchmark allocation,
//! [`metrics`] the efficiency and volatility criteria, and [`harness`]
//! drives seeded multi-day experiments and writes their outputs.

pub mod harness;
pub mod market;
pub mod metrics;
pub mod oracle;
pub mod price;
pub mod strategies;

pub use price::Price;
