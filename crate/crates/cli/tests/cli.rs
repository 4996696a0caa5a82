use std::path::PathBuf;
use std::process::{Command, Output};

fn dfdg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfdg")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dfdg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn counts_succeed() {
    let out = dfdg(&["counts", "--system", "double-pendulum"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("newton_iteration_SIA4_DF,4,221,221,true"), "{text}");
}

#[test]
fn integrate_writes_csv() {
    let path = scratch("traj.csv");
    let out =
        dfdg(&["integrate", "--system", "harmonic", "--h", "0.1", "--steps", "10", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 12);
}

#[test]
fn terrain_writes_secondary_files() {
    let path = scratch("terrain.csv");
    let out = dfdg(&["terrain", "--steps", "50", "--raster", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["terrain.csv", "terrain_raster.csv", "terrain_containment.csv"] {
        assert!(path.with_file_name(name).exists(), "{name}");
    }
}

#[test]
fn config_file_and_override() {
    let cfg = scratch("study.cfg");
    std::fs::write(&cfg, "system = harmonic\nmethod = SIA_DF\nh = 0.1\nsteps = 3\n").unwrap();
    let out = dfdg(&["integrate", "--config", cfg.to_str().unwrap(), "--steps", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 7);
}

#[test]
fn configuration_errors_exit_2() {
    assert_eq!(dfdg(&["converge", "--levels", "2"]).status.code(), Some(2));
    assert_eq!(dfdg(&["integrate", "--system", "pendulum3"]).status.code(), Some(2));
    assert_eq!(dfdg(&["integrate", "--config", "/nonexistent/dfdg.cfg"]).status.code(), Some(2));
    assert_eq!(dfdg(&["integrate", "--h", "-1"]).status.code(), Some(2));
    assert_eq!(dfdg(&["terrain", "--grid", "/nonexistent/grid.txt"]).status.code(), Some(2));
}

#[test]
fn solver_failure_exits_1() {
    let out = dfdg(&["integrate", "--method", "SIA4_DF", "--tol", "1e-15", "--steps", "3", "--h", "0.05"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step 0"));
}
