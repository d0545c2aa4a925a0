use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const RUN_CSV_VERSION_LINE: &str = "# satr-run v1";
pub const RUN_CSV_HEADER: &str =
    "generation,mean_return,max_return,eval_return,grad_energy,step_kl,min_param,max_param,spike_rate";

/// One row per generation.
///
/// `step_kl` is the quadratic KL of the proposed step before clamping, so
/// that for SATR it equals `eta^2 / 2 * grad_energy`. It is `None` for ES,
/// which has no sampling distribution over connectivity.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationLog {
    pub generation: u64,
    pub mean_return: f64,
    pub max_return: f64,
    pub eval_return: Option<f64>,
    pub grad_energy: f64,
    pub step_kl: Option<f64>,
    pub min_param: f64,
    pub max_param: f64,
    pub spike_rate: f64,
    /// Not written to `run.csv`; wall time goes to `timing.csv` so the run
    /// log stays reproducible.
    pub wall_ms: f64,
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl GenerationLog {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.generation,
            self.mean_return,
            self.max_return,
            opt(self.eval_return),
            self.grad_energy,
            opt(self.step_kl),
            self.min_param,
            self.max_param,
            self.spike_rate
        )
    }

    pub fn parse_row(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 9 {
            return Err(Error::Config(format!("run.csv row has {} fields, expected 9", f.len())));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number `{s}` in run.csv")))
        };
        let optnum = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        Ok(Self {
            generation: f[0]
                .parse()
                .map_err(|_| Error::Config(format!("bad generation `{}`", f[0])))?,
            mean_return: num(f[1])?,
            max_return: num(f[2])?,
            eval_return: optnum(f[3])?,
            grad_energy: num(f[4])?,
            step_kl: optnum(f[5])?,
            min_param: num(f[6])?,
            max_param: num(f[7])?,
            spike_rate: num(f[8])?,
            wall_ms: 0.0,
        })
    }
}

/// Reads every data row of a `run.csv`.
pub fn read_run_csv(path: &Path) -> Result<Vec<GenerationLog>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.starts_with('#') || line.starts_with("generation") || line.trim().is_empty() {
            continue;
        }
        rows.push(GenerationLog::parse_row(&line)?);
    }
    Ok(rows)
}

/// Appends rows to `run.csv` and `timing.csv` in a run directory, writing
/// headers when the files are new.
pub struct RunLogWriter {
    run: BufWriter<File>,
    timing: BufWriter<File>,
    run_path: PathBuf,
    timing_path: PathBuf,
}

impl RunLogWriter {
    pub fn open(dir: &Path, append: bool) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let run_path = dir.join("run.csv");
        let timing_path = dir.join("timing.csv");
        let open = |p: &Path, header: &[&str]| -> Result<BufWriter<File>> {
            let fresh = !append || !p.exists();
            let file = OpenOptions::new()
                .create(true)
                .write(true)
                .append(!fresh)
                .truncate(fresh)
                .open(p)
                .map_err(|e| Error::io(p, e))?;
            let mut w = BufWriter::new(file);
            if fresh {
                for h in header {
                    writeln!(w, "{h}").map_err(|e| Error::io(p, e))?;
                }
            }
            Ok(w)
        };
        Ok(Self {
            run: open(&run_path, &[RUN_CSV_VERSION_LINE, RUN_CSV_HEADER])?,
            timing: open(&timing_path, &["generation,wall_ms"])?,
            run_path,
            timing_path,
        })
    }

    pub fn write(&mut self, row: &GenerationLog) -> Result<()> {
        writeln!(self.run, "{}", row.csv_row()).map_err(|e| Error::io(&self.run_path, e))?;
        writeln!(self.timing, "{},{:.3}", row.generation, row.wall_ms)
            .map_err(|e| Error::io(&self.timing_path, e))?;
        self.run.flush().map_err(|e| Error::io(&self.run_path, e))?;
        self.timing.flush().map_err(|e| Error::io(&self.timing_path, e))
    }

    pub fn run_path(&self) -> &Path {
        &self.run_path
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_round_trip() {
        let row = GenerationLog {
            generation: 3,
            mean_return: -12.5,
            max_return: -4.0,
            eval_return: None,
            grad_energy: 0.012_345_678_901_234_5,
            step_kl: Some(1.5e-7),
            min_param: 0.001,
            max_param: 0.999,
            spike_rate: 0.0,
            wall_ms: 0.0,
        };
        let line = row.csv_row();
        assert_eq!(line.split(',').nth(3), Some(""));
        assert_eq!(GenerationLog::parse_row(&line).unwrap(), row);
        assert!(GenerationLog::parse_row("1,2,3").is_err());
    }
}
