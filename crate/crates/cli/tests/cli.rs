use std::fs;
use std::process::Command;

fn vns() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vns"))
}

fn write_config(dir: &std::path::Path, extra: &str) -> std::path::PathBuf {
    let text = format!(
        "[fluid]\nn = 16\nt_final = 0.005\nu0_amplitude = 0.2\n[kinetic]\nparticles = 1000\n{extra}[output]\ndir = {}\n",
        dir.join("out").display()
    );
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = vns().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/diagnostics.csv").exists());
}

#[test]
fn unknown_key_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "partciles = 10\n");
    let out = vns().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("partciles"));
}

#[test]
fn numerical_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(
        &cfg,
        format!(
            "[fluid]\nn = 16\ndt = 0.01\nt_final = 0.05\nu0_amplitude = 400\n[kinetic]\nparticles = 100\n[output]\ndir = {}\n",
            dir.path().join("out").display()
        ),
    )
    .unwrap();
    let out = vns().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("out/error.txt").exists());
}

#[test]
fn sweep_with_increasing_epsilons_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[sweep]\nepsilons = 0.01, 0.05, 0.1\n");
    let text = fs::read_to_string(&cfg).unwrap().replace("[kinetic]", "reference = tns\n[kinetic]");
    fs::write(&cfg, text).unwrap();
    let out = vns().arg("sweep").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_filter() {
    let out = vns().args(["validate", "--filter", "w1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 3);
    let none = vns().args(["validate", "--filter", "nothing"]).output().unwrap();
    assert_eq!(none.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = vns().args(["run", "/nonexistent/x.cfg"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
