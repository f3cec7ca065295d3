//! CSV output of sweeps.
//!
//! Floats are written in Rust's shortest round-trip form, so rereading a
//! file reproduces the in-memory values bit for bit and identical sweeps
//! produce identical bytes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::{render_config, ConfigFile};
use super::SweepResult;
use crate::error::{Error, Result};
use crate::price::csv_error;

pub const SWEEP_HEADER: &str =
    "experiment,param,replication,seed,relative_profit,fee_gain,rebalancing_component,n_arb_trades,p1,pT";
pub const CURVE_HEADER: &str = "param,mean,stderr";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFiles {
    pub sweep: PathBuf,
    pub curve: PathBuf,
    pub config: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub param: f64,
    pub mean: f64,
    pub stderr: f64,
}

/// Writes `sweep.csv` (one row per grid point and replication), `curve.csv`
/// (mean and standard error per grid point) and `config.txt` (the base
/// configuration, with `seed` set to the sweep's seed base).
pub fn write_results(result: &SweepResult, out_dir: &Path) -> Result<OutputFiles> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = OutputFiles {
        sweep: out_dir.join("sweep.csv"),
        curve: out_dir.join("curve.csv"),
        config: out_dir.join("config.txt"),
    };

    write_lines(&files.sweep, |w| {
        writeln!(w, "{SWEEP_HEADER}")?;
        for point in &result.points {
            for run in &point.runs {
                let m = &run.result.metrics;
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{}",
                    result.experiment,
                    point.param,
                    run.replication,
                    run.seed,
                    m.relative_profit,
                    m.fee_contribution,
                    m.rebalancing_component,
                    run.result.n_arb_trades,
                    m.p1,
                    m.p_t
                )?;
            }
        }
        Ok(())
    })?;

    write_lines(&files.curve, |w| {
        writeln!(w, "{CURVE_HEADER}")?;
        for point in &result.points {
            writeln!(w, "{},{},{}", point.param, point.mean, point.stderr)?;
        }
        Ok(())
    })?;

    let echo = ConfigFile {
        sim: crate::sim::SimConfig {
            seed: result.seed_base,
            ..result.base.clone()
        },
        experiment: Some(result.experiment),
        grid: Some(result.points.iter().map(|p| p.param).collect()),
        replications: Some(result.replications),
    };
    write_lines(&files.config, |w| w.write_all(render_config(&echo).as_bytes()))?;
    Ok(files)
}

fn write_lines(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_curve(path: &Path) -> Result<Vec<CurveRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Schema {
                    path: path.to_path_buf(),
                    line,
                    reason: format!("column {i} is missing or not a number"),
                })
        };
        rows.push(CurveRow {
            param: field(0)?,
            mean: field(1)?,
            stderr: field(2)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{load_config, sweep, Experiment, SweepSpec};
    use crate::sim::SimConfig;

    fn spec() -> SweepSpec {
        let base = SimConfig {
            pool_size: 1e6,
            initial_price: 100.0,
            volume: 2e7,
            n_steps: 300,
            seed: 123,
            ..SimConfig::default()
        };
        SweepSpec::new(Experiment::ArbCost, vec![0.0, 0.01, 0.02], 2, base)
    }

    #[test]
    fn writes_expected_rows() {
        let dir = tempfile::tempdir().unwrap();
        let result = sweep(&spec()).unwrap();
        let files = write_results(&result, dir.path()).unwrap();
        let sweep_csv = fs::read_to_string(&files.sweep).unwrap();
        let lines: Vec<&str> = sweep_csv.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines.len(), 1 + 6);
        assert!(lines[1].starts_with("arb_cost,0,0,123,"));
        assert!(lines[6].starts_with("arb_cost,0.02,1,124,"));

        let curve = read_curve(&files.curve).unwrap();
        assert_eq!(curve.len(), 3);
        for (row, point) in curve.iter().zip(&result.points) {
            assert_eq!(row.param, point.param);
            assert!((row.mean - point.mean).abs() <= 1e-12);
            assert_eq!(row.mean, point.mean);
            assert_eq!(row.stderr, point.stderr);
        }
    }

    #[test]
    fn config_echo_reproduces_the_sweep() {
        let dir = tempfile::tempdir().unwrap();
        let result = sweep(&spec()).unwrap();
        let files = write_results(&result, dir.path()).unwrap();
        let echo = load_config(&files.config).unwrap();
        let again = SweepSpec {
            seed_base: echo.sim.seed,
            ..SweepSpec::new(
                echo.experiment.unwrap(),
                echo.grid.unwrap(),
                echo.replications.unwrap(),
                echo.sim,
            )
        };
        assert_eq!(sweep(&again).unwrap(), result);
    }

    #[test]
    fn unwritable_directory_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let result = sweep(&spec()).unwrap();
        let err = write_results(&result, &blocker.join("sub")).unwrap_err();
        assert_eq!(err.kind(), crate::ErrorKind::Io);
    }
}
