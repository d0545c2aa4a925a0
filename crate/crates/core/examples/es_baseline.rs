//! Gaussian ES over real-valued weights, the dense-network baseline.
//!
//! Weights start at zero, so the unperturbed network is silent and
//! evaluation sees the do-nothing policy until the mean weights carry
//! the hidden layer over threshold.

use satr::env::EnvKind;
use satr::optim::OptimizerKind;
use satr::runner::{Params, RunConfig, Trainer};

fn main() -> satr::Result<()> {
    let cfg = RunConfig {
        env: EnvKind::PoleBalance,
        optimizer: OptimizerKind::Es,
        horizon: Some(500),
        d_h: 16,
        substeps: 8,
        input_gain: 10.0,
        pop_size: 256,
        generations: 60,
        eval_every: 10,
        eval_episodes: 16,
        ..RunConfig::default()
    };
    let mut t = Trainer::new(cfg, 0)?;
    println!("initial eval {:.2}", t.evaluate()?.mean_return);
    for _ in 0..60 {
        let log = t.run_generation()?;
        if let Some(e) = log.eval_return {
            println!(
                "gen {:>2}  population mean {:6.1}  best {:5.0}  eval {:6.1}",
                log.generation, log.mean_return, log.max_return, e
            );
        }
    }
    if let Params::Weights(w) = t.params() {
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        println!("{} weights, norm {norm:.3}", w.len());
    }
    Ok(())
}
