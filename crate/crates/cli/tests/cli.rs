//! End-to-end checks of the command-line surface: exit codes, stage
//! dependency errors, and artifact schemas.

use std::path::{Path, PathBuf};
use std::process::Command;

fn netsir() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netsir"))
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("netsir-cli-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const ONE_NODE: &str = r#"
name = "solo"
seed = 7
horizon = 40

[network]
h = 1.0
nodes = ["A"]
populations = [1000]

[[network.beta]]
start = 0
rows = [[0.3]]

[[network.gamma]]
start = 0
rates = [0.4]

[initial]
s = [0.95]
x = [0.05]
r = [0.0]
"#;

#[test]
fn validate_accepts_shipped_benchmark() {
    let out = netsir()
        .args(["validate"])
        .arg(scenario_dir().join("indiana.scenario"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("assumptions: ok"));
    assert!(stdout.contains("control hypotheses: ok"));
}

#[test]
fn validate_rejects_assumption_breach_with_exit_one() {
    let dir = tmp_dir("badgamma");
    let body = ONE_NODE.replace("rates = [0.4]", "rates = [1.2]");
    let path = write_scenario(&dir, "bad.scenario", &body);
    let out = netsir().arg("validate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("Assumption 2"),
        "report should name the violated assumption: {stdout}"
    );
}

#[test]
fn validate_rejects_missing_beta_piece_with_exit_one() {
    let dir = tmp_dir("nobeta");
    let body = ONE_NODE
        .replace("[[network.beta]]\nstart = 0\nrows = [[0.3]]\n", "")
        .replace("start = 0\nrows = [[0.3]]", "");
    let path = write_scenario(&dir, "structural.scenario", &body);
    let out = netsir().arg("validate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_single_stage_produces_only_trajectory() {
    let dir = tmp_dir("stage-sim");
    let path = write_scenario(&dir, "solo.scenario", ONE_NODE);
    let out_dir = dir.join("out");
    let out = netsir()
        .arg("run")
        .arg(&path)
        .args(["--stage", "simulate", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("trajectory.csv").exists());
    assert!(!out_dir.join("testing.csv").exists());
    let content = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(content.starts_with("k,node,s,x,r\n"));
    // horizon 40 -> 41 states for one node, plus header
    assert_eq!(content.lines().count(), 42);
}

#[test]
fn stage_dependency_error_names_missing_stage() {
    let dir = tmp_dir("dep");
    let body = format!(
        "{ONE_NODE}\n[testing]\np_test = [0.3]\nt1 = 2\nt2 = 30\nmode = \"expectation\"\n"
    );
    let path = write_scenario(&dir, "dep.scenario", &body);
    let out_dir = dir.join("out");
    let out = netsir()
        .arg("run")
        .arg(&path)
        .args(["--stage", "gen-data", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("simulate"),
        "error should name the missing stage: {stderr}"
    );
}

#[test]
fn rerun_with_same_seed_is_byte_identical() {
    let dir = tmp_dir("determinism");
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out_dir in [&out_a, &out_b] {
        let out = netsir()
            .arg("run")
            .arg(scenario_dir().join("indiana.scenario"))
            .args(["--all", "--seed", "4242", "--out"])
            .arg(out_dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for entry in std::fs::read_dir(&out_a).unwrap() {
        let name = entry.unwrap().file_name();
        let a = std::fs::read(out_a.join(&name)).unwrap();
        let b = std::fs::read(out_b.join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs between identical runs");
    }
}

#[test]
fn sweep_single_point_matches_analytic() {
    let dir = tmp_dir("sweep");
    let out_dir = dir.join("out");
    let out = netsir()
        .arg("sweep")
        .arg(scenario_dir().join("indiana.scenario"))
        .args([
            "--t1", "1:1", "--s0", "0.98:0.98:1.0", "--k-eval", "50", "--node", "I", "--out",
        ])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let content = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let mut lines = content.lines();
    assert_eq!(
        lines.next().unwrap(),
        "T1,s0_hat,error_empirical,error_analytic"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    // s0_hat = s_I(0) and t1 = 1 is the perfect-estimation corner
    let empirical: f64 = row[2].parse().unwrap();
    let analytic: f64 = row[3].parse().unwrap();
    assert!(empirical.abs() < 1e-12);
    assert!(analytic.abs() < 1e-12);
    assert!(lines.next().is_none());
}

#[test]
fn runtime_failure_exits_with_code_two() {
    let dir = tmp_dir("exit2");
    let path = write_scenario(&dir, "solo.scenario", ONE_NODE);
    // an output path under a regular file cannot be created
    let blocker = dir.join("blocker");
    std::fs::write(&blocker, "x").unwrap();
    let out = netsir()
        .arg("run")
        .arg(&path)
        .args(["--stage", "simulate", "--out"])
        .arg(blocker.join("nested"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn estimate_stage_reimports_generated_data() {
    let dir = tmp_dir("reimport");
    let out_dir = dir.join("out");
    // run gen-data and estimate in separate invocations so the estimate
    // stage must read testing.csv back from disk
    for stages in [
        vec!["--stage", "simulate,gen-data"],
        vec!["--stage", "estimate"],
    ] {
        let out = netsir()
            .arg("run")
            .arg(scenario_dir().join("indiana.scenario"))
            .args(&stages)
            .arg("--out")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let content = std::fs::read_to_string(out_dir.join("estimate.csv")).unwrap();
    assert!(content.starts_with("k,node,s,x,r,estimated\n"));
    assert!(out_dir.join("estimate_clamped.csv").exists());
}
