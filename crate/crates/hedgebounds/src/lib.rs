//! Model-free price bounds and semi-static hedging for two-period exotics.
//!
//! The pipeline: ingest and arbitrage-repair call-quote surfaces, compute
//! super-/sub-hedging price bounds and the attaining semi-static strategies by
//! cutting-plane linear programming, measure realized hedging gaps against
//! benchmark-model delta hedges, and backtest a bound-proximity trading
//! strategy with a pathwise loss floor.

pub mod backtest;
pub mod bounds;
pub mod curve;
pub mod error;
pub mod gap;
pub mod grid;
pub mod lp;
pub mod market;
pub mod models;
pub mod payoff;
pub mod spline;
pub mod strategy;

pub use error::{Error, Result};
