//! Stop a run after a few generations, reload the checkpoint and finish it.

use satr::env::EnvKind;
use satr::runner::{read_run_csv, train_seed, Checkpoint, RunConfig, RUN_CSV_HEADER};

fn main() -> satr::Result<()> {
    let dir = std::env::temp_dir().join("satr-resume-example");
    let _ = std::fs::remove_dir_all(&dir);
    let cfg = RunConfig {
        env: EnvKind::PatternMatch,
        pattern_d: 32,
        pop_size: 64,
        generations: 10,
        eval_every: 5,
        eval_episodes: 16,
        out_dir: dir.clone(),
        ..RunConfig::default()
    };
    train_seed(&RunConfig { generations: 4, ..cfg.clone() }, 0, &dir, None)?;
    let ckpt = Checkpoint::load(&dir.join("checkpoint.bin"))?;
    println!("checkpoint at generation {}, d = {}", ckpt.next_generation, ckpt.params.len());
    train_seed(&cfg, 0, &dir, Some(&ckpt))?;
    println!("{RUN_CSV_HEADER}");
    for log in read_run_csv(&dir.join("run.csv"))? {
        println!("{}", log.csv_row());
    }
    Ok(())
}
