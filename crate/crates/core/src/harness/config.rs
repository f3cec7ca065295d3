//! Flat `key = value` configuration files.
//!
//! ```text
//! # desk-scale baseline
//! N = 10000
//! fee = 0.003
//! tau = 0.01
//! ```
//!
//! Keys not set keep the baseline defaults of [`SimConfig::default`].
//! Unknown and repeated keys are errors. Relative file paths resolve against
//! the directory of the config file.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::Experiment;
use crate::arbitrage::TauMode;
use crate::error::{Error, Result};
use crate::sim::{PriceSource, SimConfig, TradeSource};

/// Parsed config: the run parameters plus optional sweep settings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigFile {
    pub sim: SimConfig,
    pub experiment: Option<Experiment>,
    pub grid: Option<Vec<f64>>,
    pub replications: Option<usize>,
}

const KEYS: &[&str] = &[
    "pool_size",
    "initial_price",
    "Q",
    "g",
    "sigma",
    "N",
    "T",
    "fee",
    "tau",
    "tau_mode",
    "arbitrage",
    "size_dispersion",
    "side_prob_a_in",
    "subsample",
    "trades",
    "replay",
    "price_path",
    "seed",
    "record_trajectory",
    "experiment",
    "grid",
    "replications",
];

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base_dir = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base_dir)
}

pub fn parse_config(text: &str, base_dir: &Path) -> Result<ConfigFile> {
    let mut out = ConfigFile::default();
    let mut seen = HashSet::new();
    let mut trades_key: Option<String> = None;
    let mut replay: Option<PathBuf> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config {
                key: line.to_string(),
                reason: format!("line {line_no}: expected `key = value`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let err = |reason: String| Error::Config {
            key: key.to_string(),
            reason: format!("line {line_no}: {reason}"),
        };
        if !KEYS.contains(&key) {
            return Err(err("unknown key".into()));
        }
        if !seen.insert(key.to_string()) {
            return Err(err("key given twice".into()));
        }
        let sim = &mut out.sim;
        match key {
            "pool_size" => sim.pool_size = parse_f64(value).map_err(err)?,
            "initial_price" => sim.initial_price = parse_f64(value).map_err(err)?,
            "Q" => sim.volume = parse_f64(value).map_err(err)?,
            "g" => sim.growth = parse_f64(value).map_err(err)?,
            "sigma" => sim.sigma = parse_f64(value).map_err(err)?,
            "N" => sim.n_steps = parse_count(value).map_err(err)?,
            "T" => sim.horizon_years = parse_f64(value).map_err(err)?,
            "fee" => sim.fee = parse_f64(value).map_err(err)?,
            "tau" => sim.tau = parse_f64(value).map_err(err)?,
            "tau_mode" => {
                sim.tau_mode = match value {
                    "subtract" => TauMode::Subtract,
                    "trigger_only" => TauMode::TriggerOnly,
                    _ => return Err(err(format!("expected `subtract` or `trigger_only`, got `{value}`"))),
                }
            }
            "arbitrage" => sim.arbitrage = parse_bool(value).map_err(err)?,
            "size_dispersion" => sim.size_dispersion = parse_f64(value).map_err(err)?,
            "side_prob_a_in" => sim.side_prob_a_in = parse_f64(value).map_err(err)?,
            "subsample" => sim.subsample = parse_count(value).map_err(err)?,
            "trades" => trades_key = Some(value.to_string()),
            "replay" => replay = Some(base_dir.join(value)),
            "price_path" => sim.prices = PriceSource::File(base_dir.join(value)),
            "seed" => {
                sim.seed = value
                    .parse()
                    .map_err(|_| err(format!("expected an unsigned integer, got `{value}`")))?
            }
            "record_trajectory" => sim.record_trajectory = parse_bool(value).map_err(err)?,
            "experiment" => out.experiment = Some(value.parse().map_err(err)?),
            "grid" => out.grid = Some(parse_grid(value).map_err(err)?),
            "replications" => out.replications = Some(parse_count(value).map_err(err)?),
            _ => unreachable!("key list and match arms out of sync: {key}"),
        }
    }

    out.sim.trades = match (trades_key.as_deref(), replay) {
        (None | Some("replay"), Some(path)) => TradeSource::Replay(path),
        (Some("replay"), None) => {
            return Err(Error::Config {
                key: "trades".into(),
                reason: "`trades = replay` needs a `replay = <file>` entry".into(),
            })
        }
        (None | Some("synthetic"), None) => TradeSource::Synthetic,
        (Some("none"), None) => TradeSource::Empty,
        (Some(other), _) => return Err(Error::Config {
            key: "trades".into(),
            reason: format!(
                "expected `synthetic`, `none` or `replay`, got `{other}` (with `replay` set only `replay` is allowed)"
            ),
        }),
    };

    out.sim.validate().map_err(|e| match e {
        Error::InvalidParameter { name, reason } => Error::Config {
            key: name.to_string(),
            reason,
        },
        other => other,
    })?;
    Ok(out)
}

fn parse_f64(value: &str) -> std::result::Result<f64, String> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("expected a number, got `{value}`"))
}

/// Accepts `10000` as well as `1.31e6`, as long as the value is integral.
fn parse_count(value: &str) -> std::result::Result<usize, String> {
    if let Ok(n) = value.parse::<usize>() {
        return Ok(n);
    }
    match value.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => Ok(v as usize),
        _ => Err(format!("expected a non-negative integer, got `{value}`")),
    }
}

fn parse_bool(value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{value}`")),
    }
}

pub(crate) fn parse_grid(value: &str) -> std::result::Result<Vec<f64>, String> {
    let grid = value
        .split(',')
        .map(|s| parse_f64(s.trim()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if grid.is_empty() {
        return Err("grid must not be empty".into());
    }
    Ok(grid)
}

/// Renders a config in the same format `parse_config` reads. Paths are
/// written as given.
pub fn render_config(cfg: &ConfigFile) -> String {
    let s = &cfg.sim;
    let mut out = String::new();
    let mut kv = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("pool_size", &s.pool_size);
    kv("initial_price", &s.initial_price);
    kv("Q", &s.volume);
    kv("g", &s.growth);
    kv("sigma", &s.sigma);
    kv("N", &s.n_steps);
    kv("T", &s.horizon_years);
    kv("fee", &s.fee);
    kv("tau", &s.tau);
    kv(
        "tau_mode",
        &match s.tau_mode {
            TauMode::Subtract => "subtract",
            TauMode::TriggerOnly => "trigger_only",
        },
    );
    kv("arbitrage", &s.arbitrage);
    kv("size_dispersion", &s.size_dispersion);
    kv("side_prob_a_in", &s.side_prob_a_in);
    kv("subsample", &s.subsample);
    match &s.trades {
        TradeSource::Synthetic => kv("trades", &"synthetic"),
        TradeSource::Empty => kv("trades", &"none"),
        TradeSource::Replay(p) => kv("replay", &p.display()),
    }
    if let PriceSource::File(p) = &s.prices {
        kv("price_path", &p.display());
    }
    kv("seed", &s.seed);
    kv("record_trajectory", &s.record_trajectory);
    if let Some(e) = cfg.experiment {
        kv("experiment", &e);
    }
    if let Some(grid) = &cfg.grid {
        let joined: Vec<String> = grid.iter().map(f64::to_string).collect();
        kv("grid", &joined.join(","));
    }
    if let Some(r) = cfg.replications {
        kv("replications", &r);
    }
    out
}
