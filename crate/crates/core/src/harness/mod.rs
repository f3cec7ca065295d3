//! Parameter sweeps with Monte Carlo replication.
//!
//! Replication `i` of every grid point runs with seed `seed_base + i`, so
//! grid points share price paths and order flow (common random numbers) and
//! a sweep is reproducible from its spec alone. Runs are independent and may
//! be dispatched to a thread pool; results are collected in
//! `(grid point, replication)` order either way.

mod config;
mod output;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

pub use config::{load_config, parse_config, render_config, ConfigFile};
pub use output::{read_curve, write_results, CurveRow, OutputFiles, CURVE_HEADER, SWEEP_HEADER};

use crate::error::{Error, Result};
use crate::feed::{self, TradeEvent};
use crate::price::{trend_to_drift, PricePath};
use crate::sim::{run_with, PriceSource, RunResult, SimConfig, TradeSource};

pub const DEFAULT_REPLICATIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    /// Grid: subsample stride `n` (keep every n-th order).
    TradingActivity,
    /// Grid: initial pool value in B, volume held fixed.
    Liquidity,
    /// Grid: yearly price trend, e.g. `-0.5` for a 50% drop.
    Growth,
    /// As `Growth` with fee and tau forced to zero.
    GrowthNoFee,
    /// Grid: arbitrageur transaction cost tau.
    ArbCost,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::TradingActivity,
        Experiment::Liquidity,
        Experiment::Growth,
        Experiment::GrowthNoFee,
        Experiment::ArbCost,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::TradingActivity => "trading_activity",
            Experiment::Liquidity => "liquidity",
            Experiment::Growth => "growth",
            Experiment::GrowthNoFee => "growth_no_fee",
            Experiment::ArbCost => "arb_cost",
        }
    }

    pub fn default_grid(&self) -> Vec<f64> {
        match self {
            Experiment::TradingActivity => vec![8.0, 4.0, 2.0, 1.0],
            Experiment::Liquidity => vec![125e6, 250e6, 500e6, 1e9],
            Experiment::Growth => vec![-0.9, -0.75, -0.5, -0.25, 0.0, 0.5, 1.0, 2.0, 3.0, 4.0],
            Experiment::GrowthNoFee => vec![-0.9, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 0.9],
            Experiment::ArbCost => vec![0.0, 0.01, 0.02, 0.03, 0.04, 0.05],
        }
    }

    /// The run configuration for grid value `param`.
    pub fn apply(&self, base: &SimConfig, param: f64) -> Result<SimConfig> {
        let mut cfg = base.clone();
        match self {
            Experiment::TradingActivity => {
                if !(param >= 1.0 && param.fract() == 0.0 && param <= u32::MAX as f64) {
                    return Err(Error::invalid(
                        "grid",
                        format!("subsample stride must be a positive integer, got {param}"),
                    ));
                }
                cfg.subsample = param as usize;
            }
            Experiment::Liquidity => cfg.pool_size = param,
            Experiment::Growth => cfg.growth = trend_to_drift(param)?,
            Experiment::GrowthNoFee => {
                cfg.growth = trend_to_drift(param)?;
                cfg.fee = 0.0;
                cfg.tau = 0.0;
            }
            Experiment::ArbCost => cfg.tau = param,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Experiment::ALL.into_iter().find(|e| e.name() == key).ok_or_else(|| {
            let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
            format!("unknown experiment `{s}` (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub experiment: Experiment,
    pub grid: Vec<f64>,
    pub replications: usize,
    pub base: SimConfig,
    pub seed_base: u64,
}

impl SweepSpec {
    pub fn new(experiment: Experiment, grid: Vec<f64>, replications: usize, base: SimConfig) -> Self {
        let seed_base = base.seed;
        Self {
            experiment,
            grid,
            replications,
            base,
            seed_base,
        }
    }

    pub fn seed(&self, replication: usize) -> u64 {
        self.seed_base.wrapping_add(replication as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::invalid("grid", "must not be empty"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications", "must be >= 1"));
        }
        for &param in &self.grid {
            self.experiment.apply(&self.base, param)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dispatch {
    Serial,
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRun {
    pub replication: usize,
    pub seed: u64,
    pub result: RunResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub param: f64,
    pub mean: f64,
    pub stderr: f64,
    pub runs: Vec<ReplicationRun>,
}

impl GridPoint {
    pub fn profits(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.result.metrics.relative_profit).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub experiment: Experiment,
    pub base: SimConfig,
    pub seed_base: u64,
    pub replications: usize,
    pub points: Vec<GridPoint>,
}

impl SweepResult {
    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }
}

/// Sample mean and standard error (`s / sqrt(n)`, zero for a single value).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Inputs loaded once per sweep rather than once per run.
struct SharedInputs {
    prices: Option<PricePath>,
    replay: Option<Vec<TradeEvent>>,
}

impl SharedInputs {
    fn load(base: &SimConfig) -> Result<Self> {
        let prices = match &base.prices {
            PriceSource::File(path) => Some(PricePath::read_csv(path)?),
            PriceSource::Gbm => None,
        };
        let replay = match &base.trades {
            TradeSource::Replay(path) => Some(feed::load_replay(path)?),
            _ => None,
        };
        Ok(Self { prices, replay })
    }

    fn run(&self, cfg: &SimConfig) -> Result<RunResult> {
        let generated;
        let prices = match &self.prices {
            Some(p) => p,
            None => {
                generated = cfg.price_path()?;
                &generated
            }
        };
        let raw = match &self.replay {
            Some(events) => feed::subsample_nth(events, cfg.subsample)?,
            None => feed::subsample_nth(&cfg.trade_feed()?, cfg.subsample)?,
        };
        run_with(cfg, prices, &raw)
    }
}

/// Runs every `(grid point, replication)` pair on the rayon thread pool.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    sweep_with(spec, Dispatch::Parallel)
}

pub fn sweep_with(spec: &SweepSpec, dispatch: Dispatch) -> Result<SweepResult> {
    spec.validate()?;
    let shared = SharedInputs::load(&spec.base)?;
    let jobs: Vec<(usize, usize)> = (0..spec.grid.len())
        .flat_map(|g| (0..spec.replications).map(move |r| (g, r)))
        .collect();

    let run_job = |&(g, rep): &(usize, usize)| -> Result<ReplicationRun> {
        let param = spec.grid[g];
        let seed = spec.seed(rep);
        let wrap = |e: Error| Error::SweepRun {
            param,
            seed,
            source: Box::new(e),
        };
        let mut cfg = spec.experiment.apply(&spec.base, param).map_err(wrap)?;
        cfg.seed = seed;
        cfg.record_trajectory = false;
        let result = shared.run(&cfg).map_err(wrap)?;
        Ok(ReplicationRun {
            replication: rep,
            seed,
            result,
        })
    };

    let outcomes: Vec<Result<ReplicationRun>> = match dispatch {
        Dispatch::Serial => jobs.iter().map(run_job).collect(),
        Dispatch::Parallel => jobs.par_iter().map(run_job).collect(),
    };

    let mut points: Vec<GridPoint> = spec
        .grid
        .iter()
        .map(|&param| GridPoint {
            param,
            mean: f64::NAN,
            stderr: f64::NAN,
            runs: Vec::with_capacity(spec.replications),
        })
        .collect();
    for (&(g, _), outcome) in jobs.iter().zip(outcomes) {
        points[g].runs.push(outcome?);
    }
    for point in &mut points {
        let (mean, stderr) = mean_stderr(&point.profits());
        point.mean = mean;
        point.stderr = stderr;
    }
    Ok(SweepResult {
        experiment: spec.experiment,
        base: spec.base.clone(),
        seed_base: spec.seed_base,
        replications: spec.replications,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::impermanent_loss_analytic;
    use crate::sim::run_simulation;

    fn tiny() -> SimConfig {
        SimConfig {
            pool_size: 1e6,
            initial_price: 100.0,
            volume: 2e7,
            n_steps: 500,
            ..SimConfig::default()
        }
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert_eq!("ARB-COST".parse::<Experiment>().unwrap(), Experiment::ArbCost);
        assert!("growht".parse::<Experiment>().is_err());
    }

    #[test]
    fn apply_sets_the_right_knob() {
        let base = tiny();
        assert_eq!(Experiment::TradingActivity.apply(&base, 4.0).unwrap().subsample, 4);
        assert!(Experiment::TradingActivity.apply(&base, 1.5).is_err());
        assert!(Experiment::TradingActivity.apply(&base, 0.0).is_err());
        assert_eq!(Experiment::Liquidity.apply(&base, 5e6).unwrap().pool_size, 5e6);
        assert!((Experiment::Growth.apply(&base, 1.0).unwrap().growth - 2f64.ln()).abs() < 1e-15);
        let nf = Experiment::GrowthNoFee
            .apply(
                &SimConfig {
                    tau: 0.01,
                    ..base.clone()
                },
                0.0,
            )
            .unwrap();
        assert_eq!((nf.fee, nf.tau, nf.growth), (0.0, 0.0, 0.0));
        assert_eq!(Experiment::ArbCost.apply(&base, 0.03).unwrap().tau, 0.03);
        assert!(Experiment::ArbCost.apply(&base, 0.999).is_err());
        assert!(Experiment::Growth.apply(&base, -1.0).is_err());
    }

    #[test]
    fn mean_and_stderr() {
        assert_eq!(mean_stderr(&[2.0]), (2.0, 0.0));
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(mean_stderr(&[]).0.is_nan());
    }

    #[test]
    fn degenerate_sweep_matches_single_run() {
        let base = SimConfig { seed: 31, ..tiny() };
        let spec = SweepSpec::new(Experiment::ArbCost, vec![0.01], 1, base.clone());
        let result = sweep(&spec).unwrap();
        let single = run_simulation(&SimConfig { tau: 0.01, ..base }).unwrap();
        assert_eq!(result.points[0].runs[0].result, single);
        assert_eq!(result.points[0].mean, single.metrics.relative_profit);
        assert_eq!(result.points[0].stderr, 0.0);
    }

    #[test]
    fn no_fee_growth_sweep_matches_formula() {
        let base = SimConfig {
            sigma: 0.0,
            trades: TradeSource::Empty,
            ..tiny()
        };
        let grid = vec![-0.9, 0.0, 0.9];
        let spec = SweepSpec::new(Experiment::GrowthNoFee, grid.clone(), 2, base);
        let result = sweep(&spec).unwrap();
        for (point, trend) in result.points.iter().zip(grid) {
            let il = impermanent_loss_analytic(1.0 + trend).unwrap();
            assert!((point.mean - il).abs() < 1e-9, "{trend}: {} vs {il}", point.mean);
        }
        assert!((result.points[0].mean + 0.425_040).abs() < 1e-6);
        assert!((result.points[2].mean + 0.049_376).abs() < 1e-6);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let spec = SweepSpec::new(
            Experiment::Liquidity,
            vec![5e5, 1e6, 2e6],
            3,
            SimConfig { seed: 5, ..tiny() },
        );
        assert_eq!(
            sweep_with(&spec, Dispatch::Serial).unwrap(),
            sweep_with(&spec, Dispatch::Parallel).unwrap()
        );
    }

    #[test]
    fn stored_runs_reproduce_aggregates() {
        let spec = SweepSpec::new(Experiment::ArbCost, vec![0.0, 0.02], 4, tiny());
        let result = sweep(&spec).unwrap();
        for p in &result.points {
            assert_eq!(mean_stderr(&p.profits()), (p.mean, p.stderr));
            let seeds: Vec<u64> = p.runs.iter().map(|r| r.seed).collect();
            assert_eq!(seeds, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(sweep(&SweepSpec::new(Experiment::ArbCost, vec![], 2, tiny())).is_err());
        assert!(sweep(&SweepSpec::new(Experiment::ArbCost, vec![0.0], 0, tiny())).is_err());
        assert!(sweep(&SweepSpec::new(Experiment::Liquidity, vec![-1.0], 1, tiny())).is_err());
    }

    #[test]
    fn failing_run_names_grid_point_and_seed() {
        let base = SimConfig {
            growth: 0.0,
            sigma: 0.0,
            trades: TradeSource::Empty,
            seed: 9,
            ..tiny()
        };
        // A trend this large overflows the price path within a few steps.
        let spec = SweepSpec::new(
            Experiment::Growth,
            vec![0.0, 1e300],
            2,
            SimConfig {
                horizon_years: 1e3,
                ..base
            },
        );
        match sweep(&spec) {
            Err(Error::SweepRun { param, seed, .. }) => {
                assert_eq!(param, 1e300);
                assert_eq!(seed, 9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
