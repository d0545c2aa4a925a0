//! Train a 16-neuron spiking controller on pole balancing and write the run
//! directory (run.csv, timing.csv, checkpoint.bin).

use std::path::PathBuf;

use satr::env::EnvKind;
use satr::runner::{train, RunConfig};

fn main() -> satr::Result<()> {
    let out_dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "runs/pole".into());
    let cfg = RunConfig {
        env: EnvKind::PoleBalance,
        horizon: Some(1000),
        d_h: 16,
        substeps: 8,
        input_gain: 10.0,
        pop_size: 128,
        generations: 150,
        eta: 6.0,
        eval_every: 25,
        eval_episodes: 32,
        out_dir,
        ..RunConfig::default()
    };
    for run in train(&cfg)? {
        for log in run.logs.iter().filter(|l| l.eval_return.is_some()) {
            println!(
                "gen {:>3}  train mean {:7.1}  eval {:7.1}  spike rate {:.4}",
                log.generation,
                log.mean_return,
                log.eval_return.unwrap_or_default(),
                log.spike_rate
            );
        }
        println!("wrote {}", run.run_dir.display());
    }
    Ok(())
}
