use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use satr::bitset::{bench_kernel, BenchResult};
use satr::energy::{format_energy_table, EnergyParams};
use satr::optim::OptimizerKind;
use satr::runner::{self, read_run_csv, Checkpoint, EvalMode, RunConfig, Trainer};
use satr::{Error, Result};

#[derive(Parser)]
#[command(name = "satr", version, about = "Train and evaluate Bernoulli-connectivity spiking policies")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train from a TOML config.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Run only this seed instead of the config's list.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        optimizer: Option<OptimizerKind>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Continue from a checkpoint, appending to the existing run.csv.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Evaluate a checkpoint.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 128)]
        episodes: usize,
        /// Threshold rho at 0.5 instead of sampling per episode.
        #[arg(long)]
        map: bool,
    },
    /// Time the AND+popcount kernel against a dense f32 matvec; prints CSV.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "256")]
        d: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "256")]
        rows: Vec<usize>,
        #[arg(long, default_value_t = 101)]
        reps: usize,
    },
    /// Estimate training energy per population size.
    Energy {
        #[arg(long, value_delimiter = ',', default_value = "1024,2048,4096,8192")]
        pop: Vec<u64>,
        /// A run.csv whose spike_rate column supplies a measured rate.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        generations: Option<f64>,
        #[arg(long)]
        timesteps: Option<f64>,
        #[arg(long)]
        neurons: Option<f64>,
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long)]
        connections: Option<f64>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Command::Train {
            config,
            seed,
            optimizer,
            generations,
            workers,
            out,
            resume,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seeds = vec![s];
            }
            if let Some(o) = optimizer {
                cfg.optimizer = o;
            }
            if let Some(g) = generations {
                cfg.generations = g;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            cfg.validate()?;
            let outcomes = match resume {
                Some(path) => {
                    let ckpt = Checkpoint::load(&path)?;
                    if seed.is_none() {
                        cfg.seeds = vec![ckpt.run_seed];
                    }
                    let dir = runner::run_dir(&cfg, ckpt.run_seed);
                    vec![runner::train_seed(&cfg, ckpt.run_seed, &dir, Some(&ckpt))?]
                }
                None => runner::train(&cfg)?,
            };
            for o in outcomes {
                let last = o.logs.iter().rev().find_map(|l| l.eval_return);
                match last {
                    Some(r) => println!("seed {}: final eval return {r} ({})", o.seed, o.run_dir.display()),
                    None => println!("seed {}: done ({})", o.seed, o.run_dir.display()),
                }
            }
            Ok(())
        }
        Command::Eval {
            checkpoint,
            episodes,
            map,
        } => {
            let ckpt = Checkpoint::load(&checkpoint)?;
            let mut cfg = RunConfig::from_toml_str(&ckpt.config_toml)?;
            if map {
                cfg.eval_mode = EvalMode::Map;
            }
            let trainer = Trainer::from_checkpoint(&ckpt, Some(cfg))?;
            let report = trainer.evaluate_episodes(episodes)?;
            println!("episodes,mean_return,spike_rate");
            println!("{},{},{}", report.episodes, report.mean_return, report.spike_rate);
            Ok(())
        }
        Command::Bench { d, rows, reps } => {
            println!("{}", BenchResult::CSV_HEADER);
            for &di in &d {
                for &r in &rows {
                    println!("{}", bench_kernel(di, r, reps)?.csv_row());
                }
            }
            Ok(())
        }
        Command::Energy {
            pop,
            trace,
            generations,
            timesteps,
            neurons,
            rate,
            connections,
        } => {
            let mut base = EnergyParams::default();
            if let Some(v) = generations {
                base.generations = v;
            }
            if let Some(v) = timesteps {
                base.timesteps = v;
            }
            if let Some(v) = neurons {
                base.neurons = v;
            }
            if let Some(v) = rate {
                base.spike_rate = v;
            }
            if let Some(v) = connections {
                base.connections = v;
            }
            base.validate()?;
            let measured = match trace {
                Some(path) => {
                    let rows = read_run_csv(&path)?;
                    let rates: Vec<f64> = rows.iter().map(|r| r.spike_rate).filter(|r| *r > 0.0).collect();
                    if rates.is_empty() {
                        return Err(Error::EmptyTrace);
                    }
                    Some(rates.iter().sum::<f64>() / rates.len() as f64)
                }
                None => None,
            };
            print!("{}", format_energy_table(&base, &pop, measured));
            Ok(())
        }
    }
}
