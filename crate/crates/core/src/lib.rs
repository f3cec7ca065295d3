//! Agent-based Monte Carlo simulation of liquidity-provider returns in a
//! two-asset constant-product AMM.
//!
//! A run drives a pool with an exogenous GBM market price, a stream of
//! trader orders and profit-maximizing arbitrageurs, then compares the LP's
//! terminal wealth against holding the deposited assets. The [`harness`]
//! module sweeps runs over experiment grids and writes CSV results.

pub mod amm;
pub mod arbitrage;
mod error;
pub mod feed;
pub mod harness;
pub mod metrics;
pub mod price;
pub mod rng;
pub mod sim;

pub use amm::{PoolState, SwapDirection, SwapResult};
pub use arbitrage::{ArbDirection, ArbOutcome, ArbParams, TauMode};
pub use error::{Error, ErrorKind, Result};
pub use feed::{FeedSpec, TradeEvent, TradeSide};
pub use harness::{Experiment, SweepResult, SweepSpec};
pub use metrics::RunMetrics;
pub use price::{GbmParams, PricePath};
pub use sim::{run_simulation, PriceSource, RunResult, SimConfig, TradeSource};
