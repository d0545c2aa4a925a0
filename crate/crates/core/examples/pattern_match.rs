//! SATR recovering a hidden 64-bit pattern from rank-shaped returns.

use satr::env::EnvKind;
use satr::optim::OptimizerKind;
use satr::runner::{RunConfig, Trainer};

fn main() -> satr::Result<()> {
    for optimizer in [OptimizerKind::Satr, OptimizerKind::Ec] {
        let cfg = RunConfig {
            env: EnvKind::PatternMatch,
            pattern_d: 64,
            pop_size: 256,
            generations: 100,
            eta: 1.0,
            optimizer,
            eval_episodes: 0,
            ..RunConfig::default()
        };
        let mut t = Trainer::new(cfg, 0)?;
        println!("{optimizer}");
        for _ in 0..100 {
            let log = t.run_generation()?;
            if log.generation % 20 == 19 {
                println!(
                    "  gen {:>3}  mean Hamming {:6.2}  best {:3}  rho in [{:.3}, {:.3}]",
                    log.generation,
                    -log.mean_return,
                    log.max_return.abs(),
                    log.min_param,
                    log.max_param
                );
            }
        }
    }
    Ok(())
}
