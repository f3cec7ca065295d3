//! Liquidity-provider outcomes relative to holding the deposited assets.

use crate::amm::PoolState;
use crate::error::{ensure_positive, Result};

/// Terminal performance of the LP position over one run.
///
/// All profit fields are dimensionless fractions of initial wealth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    /// Pool value in B at the initial market price.
    pub w1: f64,
    /// Pool value in B at the final market price.
    pub w_t: f64,
    /// `w_t / w1`.
    pub delta_lp: f64,
    /// Value growth of holding the initial reserves outside the pool.
    pub delta_ref: f64,
    /// `delta_lp / delta_ref - 1`.
    pub relative_profit: f64,
    /// Fees collected over the run, valued in B when paid.
    pub fee_gain_b: f64,
    /// `fee_gain_b / w1`.
    pub fee_contribution: f64,
    /// `relative_profit - fee_contribution`.
    pub rebalancing_component: f64,
    pub p1: f64,
    pub p_t: f64,
}

/// LP value growth of a fee-free pool that tracks the market: `sqrt(pT / p1)`.
pub fn relative_gain_no_fee(p1: f64, p_t: f64) -> Result<f64> {
    ensure_positive("p1", p1)?;
    ensure_positive("pT", p_t)?;
    Ok((p_t / p1).sqrt())
}

/// Impermanent loss for price ratio `r = pT / p1`: `2 sqrt(r) / (1 + r) - 1`.
pub fn impermanent_loss_analytic(r: f64) -> Result<f64> {
    ensure_positive("r", r)?;
    Ok(2.0 * r.sqrt() / (1.0 + r) - 1.0)
}

/// Relative value change of holding `pool0`'s reserves from `p1` to `pT`.
pub fn hold_benchmark(pool0: &PoolState, p1: f64, p_t: f64) -> Result<f64> {
    ensure_positive("p1", p1)?;
    ensure_positive("pT", p_t)?;
    Ok(pool0.value_at(p_t) / pool0.value_at(p1))
}

pub fn compute_metrics(
    pool0: &PoolState,
    pool_t: &PoolState,
    p1: f64,
    p_t: f64,
    cumulative_fee_value_b: f64,
) -> Result<RunMetrics> {
    let delta_ref = hold_benchmark(pool0, p1, p_t)?;
    let w1 = pool0.value_at(p1);
    let w_t = pool_t.value_at(p_t);
    let delta_lp = w_t / w1;
    let relative_profit = delta_lp / delta_ref - 1.0;
    let fee_contribution = cumulative_fee_value_b / w1;
    Ok(RunMetrics {
        w1,
        w_t,
        delta_lp,
        delta_ref,
        relative_profit,
        fee_gain_b: cumulative_fee_value_b,
        fee_contribution,
        rebalancing_component: relative_profit - fee_contribution,
        p1,
        p_t,
    })
}
