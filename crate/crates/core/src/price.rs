//! External market price feed driven by geometric Brownian motion.
//!
//! `p_t = p_{t-1} * exp((g - sigma^2 / 2) dt + sigma sqrt(dt) z_t)`
//!
//! Standard normal draws come from `rand_distr::StandardNormal` (ziggurat)
//! on a ChaCha8 stream, see [`crate::rng`]. A path is therefore a pure
//! function of its parameters.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{ensure_positive, Error, Result};
use crate::rng::{stream_rng, PRICE_STREAM};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams {
    /// Initial price, B per A.
    pub p0: f64,
    /// Expected yearly growth rate (drift).
    pub growth: f64,
    /// Yearly return volatility.
    pub sigma: f64,
    /// Step length in years, `T / N`.
    pub dt: f64,
    pub seed: u64,
}

impl GbmParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("p0", self.p0)?;
        ensure_positive("dt", self.dt)?;
        if !self.growth.is_finite() {
            return Err(Error::invalid("g", format!("must be finite, got {}", self.growth)));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::invalid(
                "sigma",
                format!("must be finite and >= 0, got {}", self.sigma),
            ));
        }
        Ok(())
    }
}

/// Maps a yearly price trend (e.g. `-0.9` for a 90% drop) to the drift `g`.
///
/// With `g = ln(1 + trend)` the zero-volatility path ends exactly at
/// `p0 * (1 + trend)^T`, and for `sigma > 0` so does the expected price.
pub fn trend_to_drift(trend: f64) -> Result<f64> {
    if !(trend.is_finite() && trend > -1.0) {
        return Err(Error::invalid("trend", format!("must be finite and > -1, got {trend}")));
    }
    Ok(trend.ln_1p())
}

pub fn gbm_step(p_prev: f64, params: &GbmParams, z: f64) -> Result<f64> {
    ensure_positive("p_prev", p_prev)?;
    if !z.is_finite() {
        return Err(Error::invalid("z", format!("must be finite, got {z}")));
    }
    Ok(step_unchecked(p_prev, params, z))
}

#[inline]
fn step_unchecked(p_prev: f64, params: &GbmParams, z: f64) -> f64 {
    let drift = (params.growth - 0.5 * params.sigma * params.sigma) * params.dt;
    p_prev * (drift + params.sigma * params.dt.sqrt() * z).exp()
}

/// A price path of `n_steps + 1` strictly positive prices, starting at `p0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePath {
    prices: Vec<f64>,
}

impl PricePath {
    pub fn new(prices: Vec<f64>) -> Result<Self> {
        if prices.len() < 2 {
            return Err(Error::invalid("price path", "needs at least two prices"));
        }
        if let Some((i, p)) = prices.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::invalid("price path", format!("price {i} is {p}")));
        }
        Ok(Self { prices })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn n_steps(&self) -> usize {
        self.prices.len() - 1
    }

    pub fn first(&self) -> f64 {
        self.prices[0]
    }

    pub fn last(&self) -> f64 {
        self.prices[self.prices.len() - 1]
    }

    /// Writes a `step,price` table.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "step,price").map_err(io)?;
        for (i, p) in self.prices.iter().enumerate() {
            writeln!(w, "{i},{p}").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Reads a `step,price` table; step indices must run 0, 1, 2, ...
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let mut prices = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(path, e))?;
            let line = record.position().map_or(0, |p| p.line());
            let schema = |reason: String| Error::Schema {
                path: path.to_path_buf(),
                line,
                reason,
            };
            if record.len() != 2 {
                return Err(schema(format!("expected 2 fields, found {}", record.len())));
            }
            let step: usize = record[0]
                .trim()
                .parse()
                .map_err(|_| schema(format!("bad step `{}`", &record[0])))?;
            if step != prices.len() {
                return Err(schema(format!("expected step {}, found {step}", prices.len())));
            }
            let price: f64 = record[1]
                .trim()
                .parse()
                .map_err(|_| schema(format!("bad price `{}`", &record[1])))?;
            if !(price.is_finite() && price > 0.0) {
                return Err(schema(format!("price must be > 0, got {price}")));
            }
            prices.push(price);
        }
        Self::new(prices)
    }
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Schema {
            path: path.to_path_buf(),
            line,
            reason: format!("{other:?}"),
        },
    }
}

pub fn generate_path(params: &GbmParams, n_steps: usize) -> Result<PricePath> {
    params.validate()?;
    if n_steps == 0 {
        return Err(Error::invalid("n_steps", "must be >= 1"));
    }
    let mut rng = stream_rng(params.seed, PRICE_STREAM);
    let mut prices = Vec::with_capacity(n_steps + 1);
    let mut p = params.p0;
    prices.push(p);
    for step in 0..n_steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        p = step_unchecked(p, params, z);
        // Extreme drift or volatility can overflow or underflow.
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::NumericAbort {
                step,
                reason: format!("price path left the positive reals ({p})"),
            });
        }
        prices.push(p);
    }
    Ok(PricePath { prices })
}
