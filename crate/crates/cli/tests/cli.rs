use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn abf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn zero_step_run_writes_profile_particles_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = abf(&[
        "run",
        "v1-abf",
        "--seed",
        "1",
        "--steps",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let summary = read(&out.join("summary.txt"));
    let line = summary
        .lines()
        .find(|l| l.starts_with("mean_l1_error = "))
        .expect("headline metric");
    let err: f64 = line["mean_l1_error = ".len()..].parse().unwrap();
    assert!(err.is_finite() && err > 0.0);

    let particles = read(&out.join("seed-1/particles_final.csv"));
    let mut lines = particles.lines();
    assert_eq!(lines.next(), Some("# abf-csv v1 particles"));
    assert_eq!(lines.next(), Some("step,time,particle,x1,x2"));
    assert_eq!(lines.count(), 1000);

    let profile = read(&out.join("seed-1/force_profile.csv"));
    assert!(profile.starts_with("# abf-csv v1 force_profile\nz,estimate,reference\n"));
    assert_eq!(profile.lines().count(), 202);
    for name in ["config.txt", "reference.csv", "errors.csv"] {
        assert!(out.join(name).exists(), "{name}");
    }
}

#[test]
fn config_echo_reproduces_outputs_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let o = abf(&[
        "run",
        "v2-short",
        "--seeds",
        "2",
        "--steps",
        "5",
        "--out",
        first.to_str().unwrap(),
        "sim.n_particles=64",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let echo = first.join("config.txt");
    let o = abf(&[
        "run",
        "--config",
        echo.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    for name in [
        "summary.txt",
        "reference.csv",
        "errors.csv",
        "seed-1/force_profile.csv",
        "seed-1/particles_final.csv",
        "seed-2/particles_final.csv",
    ] {
        assert_eq!(read(&first.join(name)), read(&second.join(name)), "{name}");
    }
    let strip = |p: &Path| -> Vec<String> {
        read(p)
            .lines()
            .filter(|l| !l.starts_with("output.dir"))
            .map(String::from)
            .collect()
    };
    assert_eq!(strip(&echo), strip(&second.join("config.txt")));
}

#[test]
fn configuration_errors_exit_with_status_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let o = abf(&["run", "v1-abf", "--out", out, "kernel.epsilon=3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kernel.epsilon"), "{}", stderr(&o));

    let o = abf(&["run", "no-such-preset", "--out", out]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = dir.path().join("bad.txt");
    fs::write(&cfg, "experiment = v1-abf\n# comment\nsim.dtt = 0.1\n").unwrap();
    let o = abf(&["run", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(":3:"), "{}", stderr(&o));

    let o = abf(&["run", "v1-abf", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missed_threshold_exits_with_status_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = abf(&[
        "run",
        "v1-abf",
        "--seed",
        "3",
        "--steps",
        "0",
        "--check",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stdout(&o).contains("FAIL v1-abf mean L1 error"));
}

#[test]
fn reference_command_prints_the_table() {
    let o = abf(&["reference", "--potential", "v1", "--beta", "10", "--grid", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# abf-csv v1 reference"));
    assert_eq!(lines.next(), Some("z,A,Aprime"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 20);
    assert_eq!(rows.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min), 0.0);
    // mean force is odd around the symmetric grid
    assert!((rows[0][2] + rows[19][2]).abs() < 1e-8);
}

#[test]
fn pde_command_writes_a_normalized_density() {
    let dir = tempfile::tempdir().unwrap();
    let o = abf(&[
        "pde",
        "--grid",
        "32",
        "--t",
        "0.1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("marginal_l1_vs_heat"));
    let text = read(&dir.path().join("density.csv"));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# abf-csv v1 density"));
    assert_eq!(lines.next(), Some("x1,x2,p"));
    let cell = (4.0 / 32.0) * (8.0 / 32.0);
    let mass: f64 = lines
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap() * cell)
        .sum();
    assert!((mass - 1.0).abs() < 1e-10, "{mass}");
}

#[test]
fn presets_and_default_configs_are_listed() {
    let o = abf(&["presets"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 9);
    let o = abf(&["config", "v2-long"]);
    assert!(stdout(&o).contains("sim.steps = 2000000"));
}
