use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("scenario.toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_moebius-lab"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const TRIVIAL: &str = "scenario = \"trivial\"\nsample.n = 32\n";
const BUMP: &str = "scenario = \"conformal_bump\"\nsample.n = 32\nsweep.amplitudes = [0.0, 0.1]\n";

#[test]
fn validate_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), TRIVIAL, &["validate"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("validate: ") && stdout.contains(" 0 failed"));
    let report = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert!(report.starts_with("command,check,value,bound,status,config_hash,seed"));
    assert!(dir.path().join("out/results.csv").exists());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), TRIVIAL, &["--seed", "99", "validate"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("seed 99"));
}

#[test]
fn bump_curvature_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), BUMP, &["validate"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stderr).unwrap().contains("FAIL"));
}

#[test]
fn rigidity_refuses_a_bump() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), BUMP, &["rigidity"])), 2);
}

#[test]
fn sweep_reports_each_amplitude() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), BUMP, &["sweep"]);
    assert_eq!(code(&o), 0);
    let rows = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
}

#[test]
fn extend_at_given_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), TRIVIAL, &["extend", "--points", "0.1,0.2;-0.3,0"]);
    assert_eq!(code(&o), 0);
    let rows = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
}

#[test]
fn bad_input_is_a_precondition_failure() {
    let dir = tempfile::tempdir().unwrap();
    for pts in ["1.5,0", "0.1", "a,b"] {
        assert_eq!(code(&run(dir.path(), TRIVIAL, &["extend", "--points", pts])), 2, "{pts}");
    }
    assert_eq!(code(&run(dir.path(), "scenario = \"trivial\"\nbogus = 1\n", &["validate"])), 2);
    assert_eq!(code(&run(dir.path(), "scenario = \"trivial\"\nsample.n = 4\n", &["validate"])), 2);
}

#[test]
fn solver_breakdown_is_numerical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "scenario = \"pullback_twist\"\nsample.n = 32\nsolver.ode_tol = 1e-30\n";
    assert_eq!(code(&run(dir.path(), cfg, &["extend", "--points", "0.2,0.1"])), 3);
}
