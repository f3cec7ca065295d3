//! Trader order flow: historical replay files or a synthetic feed calibrated
//! to a yearly volume and trade count.
//!
//! Orders are denominated in B. An `A_IN` order is converted to units of A at
//! the market price of the step it executes in, so the B notional of the flow
//! does not depend on the price path.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ensure_positive, Error, Result};
use crate::price::csv_error;
use crate::rng::{stream_rng, FEED_STREAM};

pub const REPLAY_HEADER: [&str; 3] = ["step", "side", "value_b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TradeSide {
    /// Trader sends A, receives B.
    AIn,
    /// Trader sends B, receives A.
    BIn,
}

impl fmt::Display for TradeSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TradeSide::AIn => "A_IN",
            TradeSide::BIn => "B_IN",
        })
    }
}

impl FromStr for TradeSide {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A_IN" => Ok(TradeSide::AIn),
            "B_IN" => Ok(TradeSide::BIn),
            other => Err(format!("unknown side `{other}` (expected A_IN or B_IN)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeEvent {
    /// Zero-based simulation step in which the order arrives.
    pub step: usize,
    pub side: TradeSide,
    /// Order size in units of B.
    pub value_b: f64,
}

/// Parameters of a synthetic feed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedSpec {
    pub n_trades: usize,
    /// Expected total traded value in B.
    pub total_volume_b: f64,
    /// Log-space standard deviation of trade sizes; 0 gives equal sizes.
    pub size_dispersion: f64,
    pub side_prob_a_in: f64,
    pub seed: u64,
}

impl FeedSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_trades == 0 {
            return Err(Error::invalid("n_trades", "must be >= 1"));
        }
        ensure_positive("total_volume_b", self.total_volume_b)?;
        if !(self.size_dispersion.is_finite() && self.size_dispersion >= 0.0) {
            return Err(Error::invalid(
                "size_dispersion",
                format!("must be finite and >= 0, got {}", self.size_dispersion),
            ));
        }
        if !(0.0..=1.0).contains(&self.side_prob_a_in) {
            return Err(Error::invalid(
                "side_prob_a_in",
                format!("must lie in [0, 1], got {}", self.side_prob_a_in),
            ));
        }
        Ok(())
    }

    pub fn mean_trade_size(&self) -> f64 {
        self.total_volume_b / self.n_trades as f64
    }
}

/// One order per step; sizes are log-normal with mean `total / n`.
pub fn synth_feed(spec: &FeedSpec) -> Result<Vec<TradeEvent>> {
    spec.validate()?;
    let mut rng = stream_rng(spec.seed, FEED_STREAM);
    let mean = spec.mean_trade_size();
    let d = spec.size_dispersion;
    let events = (0..spec.n_trades)
        .map(|step| {
            let side = if rng.random::<f64>() < spec.side_prob_a_in {
                TradeSide::AIn
            } else {
                TradeSide::BIn
            };
            let z: f64 = StandardNormal.sample(&mut rng);
            let value_b = if d == 0.0 {
                mean
            } else {
                mean * (d * z - 0.5 * d * d).exp()
            };
            TradeEvent { step, side, value_b }
        })
        .collect();
    Ok(events)
}

/// Keeps every `n`th order (indices 0, n, 2n, ...). Orders keep their
/// original step, so the simulation clock is unaffected by thinning.
pub fn subsample_nth(feed: &[TradeEvent], n: usize) -> Result<Vec<TradeEvent>> {
    if n == 0 {
        return Err(Error::invalid("n", "subsample stride must be >= 1"));
    }
    Ok(feed.iter().step_by(n).copied().collect())
}

/// Input amount of an order at market price `p_m`: units of B for `B_IN`,
/// units of A for `A_IN`.
pub fn to_quantities(event: &TradeEvent, p_m: f64) -> f64 {
    match event.side {
        TradeSide::BIn => event.value_b,
        TradeSide::AIn => event.value_b / p_m,
    }
}

pub fn total_volume(feed: &[TradeEvent]) -> f64 {
    feed.iter().map(|e| e.value_b).sum()
}

/// Reads a replay file with header `step,side,value_b`.
///
/// An empty file is a valid, empty feed.
pub fn load_replay(path: &Path) -> Result<Vec<TradeEvent>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut events: Vec<TradeEvent> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        let schema = |reason: String| Error::Schema {
            path: path.to_path_buf(),
            line,
            reason,
        };
        if i == 0 {
            let header: Vec<&str> = record.iter().map(str::trim).collect();
            if header != REPLAY_HEADER {
                return Err(schema(format!(
                    "expected header `step,side,value_b`, found `{}`",
                    header.join(",")
                )));
            }
            continue;
        }
        if record.len() != 3 {
            return Err(schema(format!("expected 3 fields, found {}", record.len())));
        }
        let step: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| schema(format!("bad step `{}`", &record[0])))?;
        let side: TradeSide = record[1].trim().parse().map_err(schema)?;
        let value_b: f64 = record[2]
            .trim()
            .parse()
            .map_err(|_| schema(format!("bad value_b `{}`", &record[2])))?;
        if !(value_b.is_finite() && value_b > 0.0) {
            return Err(schema(format!("value_b must be > 0, got {value_b}")));
        }
        if let Some(prev) = events.last() {
            if step < prev.step {
                return Err(schema(format!("step {step} goes backwards (previous {})", prev.step)));
            }
        }
        events.push(TradeEvent { step, side, value_b });
    }
    Ok(events)
}

pub fn write_replay(path: &Path, feed: &[TradeEvent]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", REPLAY_HEADER.join(",")).map_err(io)?;
    for e in feed {
        writeln!(w, "{},{},{}", e.step, e.side, e.value_b).map_err(io)?;
    }
    w.flush().map_err(io)
}
