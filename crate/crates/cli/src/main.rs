use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ammsim::feed::{synth_feed, write_replay};
use ammsim::harness::{load_config, sweep, write_results, ConfigFile, SweepSpec, DEFAULT_REPLICATIONS};
use ammsim::metrics::{impermanent_loss_analytic, relative_gain_no_fee};
use ammsim::sim::RunResult;
use ammsim::{run_simulation, Error, ErrorKind, Experiment};
use clap::{Args, Parser, Subcommand};

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_IO: u8 = 3;

const DEFAULT_IL_RATIOS: [f64; 9] = [0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0, 10.0];

/// Constant-product liquidity pool simulator.
#[derive(Debug, Parser)]
#[command(name = "ammsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and print its metrics.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Directory for run.csv (and trajectory.csv when recorded).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment over a parameter grid with replications.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Output directory for sweep.csv, curve.csv and config.txt.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long)]
        experiment: Option<Experiment>,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<f64>>,
        #[arg(long)]
        replications: Option<usize>,
    },
    /// Tabulate fee-free LP gain and impermanent loss over price ratios pT/p1.
    AnalyticIl {
        /// Comma-separated price ratios.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<f64>>,
        /// Output CSV file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic trader feed as a replay CSV.
    GenFeed {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Key-value config file; unset keys keep the baseline defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed (the seed base for sweeps).
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<ConfigFile, Error> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => ConfigFile::default(),
        };
        if let Some(seed) = self.seed {
            cfg.sim.seed = seed;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => EXIT_CONFIG,
                ErrorKind::Runtime => EXIT_RUNTIME,
                ErrorKind::Io => EXIT_IO,
            })
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Simulate { common, out } => simulate(&common, out.as_deref()),
        Command::Sweep {
            common,
            out,
            experiment,
            grid,
            replications,
        } => {
            let cfg = common.load()?;
            let experiment = experiment.or(cfg.experiment).ok_or_else(|| Error::Config {
                key: "experiment".into(),
                reason: format!(
                    "not set; pass --experiment or set it in the config ({})",
                    experiment_names()
                ),
            })?;
            let grid = grid.or(cfg.grid).unwrap_or_else(|| experiment.default_grid());
            let replications = replications.or(cfg.replications).unwrap_or(DEFAULT_REPLICATIONS);
            let spec = SweepSpec::new(experiment, grid, replications, cfg.sim);
            let result = sweep(&spec)?;
            let files = write_results(&result, &out)?;
            println!(
                "experiment {experiment}, seed base {}, {replications} replications",
                spec.seed_base
            );
            println!("param,mean,stderr");
            for p in &result.points {
                println!("{},{},{}", p.param, p.mean, p.stderr);
            }
            eprintln!("wrote {}", files.sweep.display());
            eprintln!("wrote {}", files.curve.display());
            eprintln!("wrote {}", files.config.display());
            Ok(())
        }
        Command::AnalyticIl { grid, out } => {
            let ratios = grid.unwrap_or_else(|| DEFAULT_IL_RATIOS.to_vec());
            let mut rows = vec!["r,relative_gain_no_fee,impermanent_loss".to_string()];
            for r in ratios {
                let param = |e: Error| Error::Config {
                    key: "grid".into(),
                    reason: e.to_string(),
                };
                let gain = relative_gain_no_fee(1.0, r).map_err(param)?;
                let il = impermanent_loss_analytic(r).map_err(param)?;
                rows.push(format!("{r},{gain},{il}"));
            }
            let text = rows.join("\n") + "\n";
            match out {
                Some(path) => fs::write(&path, text).map_err(|e| io_error(&path, e)),
                None => io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| io_error(Path::new("<stdout>"), e)),
            }
        }
        Command::GenFeed { common, out } => {
            let cfg = common.load()?;
            cfg.sim.validate()?;
            let feed = synth_feed(&cfg.sim.feed_spec())?;
            write_replay(&out, &feed)?;
            eprintln!("wrote {} orders to {}", feed.len(), out.display());
            Ok(())
        }
    }
}

fn simulate(common: &Common, out: Option<&Path>) -> Result<(), Error> {
    let cfg = common.load()?;
    let result = run_simulation(&cfg.sim)?;
    let m = &result.metrics;
    println!("seed                  {}", cfg.sim.seed);
    println!("p1                    {}", m.p1);
    println!("pT                    {}", m.p_t);
    println!("relative_profit       {}", m.relative_profit);
    println!("fee_gain              {}", m.fee_contribution);
    println!("rebalancing_component {}", m.rebalancing_component);
    println!("arbitrage_trades      {}", result.n_arb_trades);
    println!("trader_trades         {}", result.n_trader_trades);
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        write_run(&dir.join("run.csv"), cfg.sim.seed, &result)?;
        if let Some(points) = &result.trajectory {
            let path = dir.join("trajectory.csv");
            write_csv(&path, |w| {
                writeln!(w, "step,p_m,spot,pool_value,reserve_a,reserve_b")?;
                for t in points {
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        t.step, t.p_m, t.spot, t.pool_value, t.reserve_a, t.reserve_b
                    )?;
                }
                Ok(())
            })?;
        }
    }
    Ok(())
}

fn write_run(path: &Path, seed: u64, r: &RunResult) -> Result<(), Error> {
    let m = &r.metrics;
    write_csv(path, |w| {
        writeln!(
            w,
            "seed,relative_profit,fee_gain,rebalancing_component,n_arb_trades,n_trader_trades,w1,wT,delta_ref,p1,pT"
        )?;
        writeln!(
            w,
            "{seed},{},{},{},{},{},{},{},{},{},{}",
            m.relative_profit,
            m.fee_contribution,
            m.rebalancing_component,
            r.n_arb_trades,
            r.n_trader_trades,
            m.w1,
            m.w_t,
            m.delta_ref,
            m.p1,
            m.p_t
        )
    })
}

fn write_csv(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), Error> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn experiment_names() -> String {
    Experiment::ALL.iter().map(|e| e.name()).collect::<Vec<_>>().join(", ")
}
