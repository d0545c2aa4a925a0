use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn satr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satr")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(
        &path,
        format!(
            "env = \"pattern_match\"\npattern_d = 12\npop_size = 16\ngenerations = 4\neval_every = 2\neval_episodes = 8\nout_dir = \"{}\"\n{extra}",
            dir.join("out").display()
        ),
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn bench_prints_csv() {
    let out = stdout(&satr(&["bench", "--d", "64,130", "--rows", "8", "--reps", "3"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "d,rows,bitset_ns,dense_ns,ratio");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("64,8,"));
    assert!(lines[2].starts_with("130,8,"));
}

#[test]
fn energy_prints_table() {
    let out = stdout(&satr(&["energy"]));
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("Population size P"));
    for v in ["5.7", "11.5", "23.0", "46.0"] {
        assert!(lines[1].contains(v), "{out}");
    }
    let out = stdout(&satr(&["energy", "--pop", "1024", "--rate", "0"]));
    assert!(out.lines().nth(1).unwrap().trim_end().ends_with("5.6"), "{out}");
}

#[test]
fn train_eval_and_energy_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = stdout(&satr(&["train", "--config", &cfg, "--seed", "3"]));
    assert!(out.contains("seed 3"));
    let run = dir.path().join("out/run.csv");
    let text = fs::read_to_string(&run).unwrap();
    assert_eq!(text.lines().count(), 2 + 4);
    let ckpt = dir.path().join("out/checkpoint.bin");
    let ev = stdout(&satr(&["eval", "--checkpoint", ckpt.to_str().unwrap(), "--episodes", "8"]));
    assert_eq!(ev.lines().next(), Some("episodes,mean_return,spike_rate"));
    assert!(ev.lines().nth(1).unwrap().starts_with("8,"));
    let map = stdout(&satr(&["eval", "--checkpoint", ckpt.to_str().unwrap(), "--map"]));
    assert!(map.lines().nth(1).unwrap().starts_with("128,"));

    // pattern_match has no network, so there is no spike rate to measure
    let bad = satr(&["energy", "--trace", run.to_str().unwrap()]);
    assert!(!bad.status.success());
}

#[test]
fn train_resume_appends() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    stdout(&satr(&["train", "--config", &cfg, "--generations", "2"]));
    let ckpt = dir.path().join("out/checkpoint.bin");
    stdout(&satr(&["train", "--config", &cfg, "--resume", ckpt.to_str().unwrap()]));
    let text = fs::read_to_string(dir.path().join("out/run.csv")).unwrap();
    assert_eq!(text.lines().count(), 2 + 4);
}

#[test]
fn optimizer_override_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    stdout(&satr(&["train", "--config", &cfg, "--optimizer", "ec_tr", "--generations", "1"]));
    let bad = satr(&["train", "--config", &cfg, "--optimizer", "adam"]);
    assert!(!bad.status.success());
    let broken = write_config(dir.path(), "no_such_key = 1\n");
    let out = satr(&["train", "--config", &broken]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_key"));
    let missing = satr(&["eval", "--checkpoint", "/nonexistent/ckpt.bin"]);
    assert!(!missing.status.success());
}

#[test]
fn energy_trace_uses_measured_rate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pole.toml");
    fs::write(
        &cfg,
        format!(
            "env = \"pole_balance\"\nhorizon = 30\nd_h = 16\nsubsteps = 4\ninput_gain = 10.0\npop_size = 8\ngenerations = 2\neval_episodes = 4\nout_dir = \"{}\"\n",
            dir.path().join("out").display()
        ),
    )
    .unwrap();
    stdout(&satr(&["train", "--config", cfg.to_str().unwrap()]));
    let run = dir.path().join("out/run.csv");
    let out = stdout(&satr(&["energy", "--pop", "1024", "--trace", run.to_str().unwrap()]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3, "{out}");
    assert!(lines[2].contains("measured R="));
}
