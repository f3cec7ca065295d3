//! The simulation loop.
//!
//! Each period: the market price moves, arbitrageurs check the pool, the
//! period's trader order (if any) executes, and arbitrageurs check again.
//! The loop is strictly sequential; independent runs share nothing.

use std::path::PathBuf;

use crate::amm::{PoolState, SwapResult};
use crate::arbitrage::{execute_arbitrage, ArbOutcome, ArbParams, TauMode};
use crate::error::{ensure_positive, ensure_rate, Error, Result};
use crate::feed::{self, to_quantities, FeedSpec, TradeEvent, TradeSide};
use crate::metrics::{compute_metrics, RunMetrics};
use crate::price::{generate_path, GbmParams, PricePath};

/// Where trader orders come from.
#[derive(Debug, Clone, PartialEq)]
pub enum TradeSource {
    /// One log-normal order per step, calibrated to the yearly volume.
    Synthetic,
    /// A `step,side,value_b` replay file.
    Replay(PathBuf),
    /// No traders: price updates and arbitrage only.
    Empty,
}

/// Where the market price path comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PriceSource {
    Gbm,
    /// A `step,price` table; its first entry is the initial price.
    File(PathBuf),
}

/// Full description of one run. Defaults reproduce the one-year WETH/USDC
/// baseline: a 250m USDC pool, 11.9bn USDC yearly volume over 1.31m trades,
/// zero drift, unit volatility and a 0.3% fee.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Initial pool value in B, split 50/50 at the initial price.
    pub pool_size: f64,
    pub initial_price: f64,
    pub fee: f64,
    /// Trader volume over the horizon, in B (`Q`).
    pub volume: f64,
    /// GBM drift `g`.
    pub growth: f64,
    pub sigma: f64,
    /// Number of simulation periods (`N`).
    pub n_steps: usize,
    /// Horizon in years (`T`).
    pub horizon_years: f64,
    pub tau: f64,
    pub tau_mode: TauMode,
    pub arbitrage: bool,
    pub size_dispersion: f64,
    pub side_prob_a_in: f64,
    /// Keep every n-th trader order.
    pub subsample: usize,
    pub trades: TradeSource,
    pub prices: PriceSource,
    pub seed: u64,
    pub record_trajectory: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            pool_size: 250e6,
            initial_price: 2765.0,
            fee: 0.003,
            volume: 11.9e9,
            growth: 0.0,
            sigma: 1.0,
            n_steps: 1_310_000,
            horizon_years: 1.0,
            tau: 0.0,
            tau_mode: TauMode::Subtract,
            arbitrage: true,
            size_dispersion: 1.0,
            side_prob_a_in: 0.5,
            subsample: 1,
            trades: TradeSource::Synthetic,
            prices: PriceSource::Gbm,
            seed: 0,
            record_trajectory: false,
        }
    }
}

impl SimConfig {
    pub const DESK_STEPS: usize = 10_000;

    /// Baseline with `N = 10^4`. Volume and pool size are unchanged, so the
    /// volume/liquidity ratio that drives the fee/rebalancing balance is kept.
    pub fn desk_scale() -> Self {
        Self {
            n_steps: Self::DESK_STEPS,
            ..Self::default()
        }
    }

    pub fn dt(&self) -> f64 {
        self.horizon_years / self.n_steps as f64
    }

    pub fn gbm_params(&self) -> GbmParams {
        GbmParams {
            p0: self.initial_price,
            growth: self.growth,
            sigma: self.sigma,
            dt: self.dt(),
            seed: self.seed,
        }
    }

    pub fn feed_spec(&self) -> FeedSpec {
        FeedSpec {
            n_trades: self.n_steps,
            total_volume_b: self.volume,
            size_dispersion: self.size_dispersion,
            side_prob_a_in: self.side_prob_a_in,
            seed: self.seed,
        }
    }

    pub fn arb_params(&self) -> ArbParams {
        ArbParams {
            tau: self.tau,
            enabled: self.arbitrage,
            tau_mode: self.tau_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("pool_size", self.pool_size)?;
        ensure_rate("fee", self.fee)?;
        ensure_positive("T", self.horizon_years)?;
        if self.n_steps == 0 {
            return Err(Error::invalid("N", "must be >= 1"));
        }
        if self.subsample == 0 {
            return Err(Error::invalid("subsample", "must be >= 1"));
        }
        self.arb_params().validate(self.fee)?;
        if self.prices == PriceSource::Gbm {
            self.gbm_params().validate()?;
        }
        if self.trades == TradeSource::Synthetic {
            self.feed_spec().validate()?;
        }
        Ok(())
    }

    pub fn price_path(&self) -> Result<PricePath> {
        match &self.prices {
            PriceSource::Gbm => generate_path(&self.gbm_params(), self.n_steps),
            PriceSource::File(path) => PricePath::read_csv(path),
        }
    }

    /// Trader orders before subsampling.
    pub fn trade_feed(&self) -> Result<Vec<TradeEvent>> {
        match &self.trades {
            TradeSource::Synthetic => feed::synth_feed(&self.feed_spec()),
            TradeSource::Replay(path) => feed::load_replay(path),
            TradeSource::Empty => Ok(Vec::new()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub p_m: f64,
    pub spot: f64,
    pub pool_value: f64,
    pub reserve_a: f64,
    pub reserve_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub metrics: RunMetrics,
    pub n_arb_trades: u64,
    pub n_trader_trades: u64,
    /// Fees paid by arbitrageurs, valued in B at the market price of the step.
    pub total_arb_fee_b: f64,
    pub total_trader_fee_b: f64,
    pub final_pool: PoolState,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

/// Mutable state of a run between periods.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub pool: PoolState,
    pub n_arb_trades: u64,
    pub n_trader_trades: u64,
    pub arb_fee_b: f64,
    pub trader_fee_b: f64,
}

impl SimState {
    pub fn new(pool: PoolState) -> Self {
        Self {
            pool,
            n_arb_trades: 0,
            n_trader_trades: 0,
            arb_fee_b: 0.0,
            trader_fee_b: 0.0,
        }
    }

    pub fn total_fee_b(&self) -> f64 {
        self.arb_fee_b + self.trader_fee_b
    }

    pub fn arbitrage(&mut self, p_m: f64, arb: &ArbParams) -> Result<ArbOutcome> {
        let (pool, outcome) = execute_arbitrage(&self.pool, p_m, arb)?;
        if outcome.executed() {
            self.pool = pool;
            self.n_arb_trades += 1;
            self.arb_fee_b += outcome.fee_value_b(p_m);
        }
        Ok(outcome)
    }

    pub fn trade(&mut self, event: &TradeEvent, p_m: f64) -> Result<SwapResult> {
        let amount = to_quantities(event, p_m);
        let swap = match event.side {
            TradeSide::BIn => self.pool.quote_b_for_a(amount)?,
            TradeSide::AIn => self.pool.quote_a_for_b(amount)?,
        };
        self.pool = swap.pool_after;
        self.n_trader_trades += 1;
        self.trader_fee_b += match event.side {
            TradeSide::BIn => swap.fee_paid,
            TradeSide::AIn => swap.fee_paid * p_m,
        };
        Ok(swap)
    }

    /// One period after the price update to `p_m`: arbitrage, the optional
    /// trader order, and arbitrage again.
    pub fn step(&mut self, p_m: f64, event: Option<&TradeEvent>, arb: &ArbParams) -> Result<()> {
        self.arbitrage(p_m, arb)?;
        if let Some(event) = event {
            self.trade(event, p_m)?;
            self.arbitrage(p_m, arb)?;
        }
        Ok(())
    }

    fn check(&self, step: usize) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(self.pool.reserve_a()) && ok(self.pool.reserve_b()) && self.total_fee_b().is_finite()) {
            return Err(Error::NumericAbort {
                step,
                reason: format!("pool left valid range: {:?}", self.pool),
            });
        }
        Ok(())
    }
}

/// Builds the price path and trader feed from `config` and runs it.
pub fn run_simulation(config: &SimConfig) -> Result<RunResult> {
    config.validate()?;
    let prices = config.price_path()?;
    let feed = feed::subsample_nth(&config.trade_feed()?, config.subsample)?;
    run_with(config, &prices, &feed)
}

/// Runs `config` against an explicit price path and (already subsampled)
/// trader feed. Pool size, fee and arbitrage settings come from `config`;
/// the path sets the number of periods and the initial price.
pub fn run_with(config: &SimConfig, prices: &PricePath, feed: &[TradeEvent]) -> Result<RunResult> {
    let n_steps = prices.n_steps();
    if let Some(bad) = feed.iter().find(|e| e.step >= n_steps) {
        return Err(Error::invalid(
            "trade feed",
            format!("order at step {} is beyond the {n_steps}-step horizon", bad.step),
        ));
    }
    if let Some(w) = feed.windows(2).find(|w| w[1].step < w[0].step) {
        return Err(Error::invalid(
            "trade feed",
            format!("step {} follows step {}", w[1].step, w[0].step),
        ));
    }
    let arb = config.arb_params();
    arb.validate(config.fee)?;

    let p = prices.prices();
    let pool0 = PoolState::init(config.pool_size, p[0], config.fee)?;
    let mut state = SimState::new(pool0);
    let mut trajectory = config.record_trajectory.then(|| Vec::with_capacity(n_steps + 1));
    let record = |traj: &mut Option<Vec<TrajectoryPoint>>, step: usize, p_m: f64, pool: &PoolState| {
        if let Some(t) = traj {
            t.push(TrajectoryPoint {
                step,
                p_m,
                spot: pool.spot_price(),
                pool_value: pool.value_at(p_m),
                reserve_a: pool.reserve_a(),
                reserve_b: pool.reserve_b(),
            });
        }
    };
    record(&mut trajectory, 0, p[0], &state.pool);

    let abort = |step: usize| {
        move |e: Error| Error::NumericAbort {
            step,
            reason: e.to_string(),
        }
    };
    let mut events = feed.iter().peekable();
    for step in 0..n_steps {
        let p_m = p[step + 1];
        state.arbitrage(p_m, &arb).map_err(abort(step))?;
        while let Some(event) = events.next_if(|e| e.step == step) {
            state.trade(event, p_m).map_err(abort(step))?;
            state.arbitrage(p_m, &arb).map_err(abort(step))?;
        }
        state.check(step)?;
        record(&mut trajectory, step + 1, p_m, &state.pool);
    }

    let metrics = compute_metrics(&pool0, &state.pool, p[0], p[n_steps], state.total_fee_b())?;
    if !metrics.relative_profit.is_finite() {
        return Err(Error::NumericAbort {
            step: n_steps,
            reason: "non-finite terminal metrics".into(),
        });
    }
    Ok(RunResult {
        metrics,
        n_arb_trades: state.n_arb_trades,
        n_trader_trades: state.n_trader_trades,
        total_arb_fee_b: state.arb_fee_b,
        total_trader_fee_b: state.trader_fee_b,
        final_pool: state.pool,
        trajectory,
    })
}
