//! Fixtures shared by the benchmarks.

use ammsim::sim::SimConfig;
use ammsim::PoolState;

/// Desk-scale run with `n_steps` periods.
pub fn desk_config(n_steps: usize) -> SimConfig {
    SimConfig {
        n_steps,
        seed: 17,
        ..SimConfig::desk_scale()
    }
}

/// Baseline pool: 250m B at an initial price of 2765, 0.3% fee.
pub fn baseline_pool() -> PoolState {
    PoolState::init(250e6, 2765.0, 0.003).expect("valid baseline pool")
}
