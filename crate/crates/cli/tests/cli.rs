use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn peg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peg"))
        .args(args)
        .env_remove("PEG_NODE_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fixture() -> String {
    data("amy_monica.model").display().to_string()
}

#[test]
fn explain_peg_p2_on_fixture() {
    let o = peg(&["explain", "--mode", "peg", "--metric", "p2", "--fixture", &fixture()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let trace: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(trace["sum_rho"], 26);
    assert_eq!(trace["complete"], true);
    assert_eq!(trace["steps"].as_array().unwrap().len(), 4);
}

#[test]
fn explain_csv_trace() {
    let o = peg(&["explain", "--metric", "p1", "--format", "csv", "--fixture", &fixture()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "step,cost_star,rho\n0,5,0\n1,10,5\n2,10,0\n3,9,1\n");
}

#[test]
fn concise_mode_reports_three_changes() {
    let o = peg(&["explain", "--mode", "concise", "--fixture", &fixture()]);
    let trace: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(trace["mode"], "concise");
    assert_eq!(trace["size"], 3);
}

#[test]
fn identical_models_give_empty_trace() {
    let d = data("rover-domain.pddl").display().to_string();
    let p = data("rover-p01.pddl").display().to_string();
    let o = peg(&[
        "explain",
        "--robot-domain",
        &d,
        "--robot-problem",
        &p,
        "--human-domain",
        &d,
        "--human-problem",
        &p,
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "step,cost_star,rho\n0,10,0\n");
}

#[test]
fn validate_accepts_explain_output() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.json");
    let t = trace.display().to_string();
    for metric in ["p1", "p2", "p3", "p4"] {
        for mode in ["peg", "concise"] {
            let o = peg(&["explain", "--mode", mode, "--metric", metric, "--fixture", &fixture(), "--out", &t]);
            assert_eq!(o.status.code(), Some(0));
            assert!(o.stdout.is_empty());
            let o = peg(&["validate", &t, "--fixture", &fixture()]);
            assert_eq!(o.status.code(), Some(0), "{mode} {metric}");
            let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
            assert_eq!(v["complete"], true);
        }
    }
}

#[test]
fn validate_rejects_partial_change_list() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("changes.txt");
    std::fs::write(&path, "add init-has-car-ready\nadd init-has-is-sunny\n").unwrap();
    let o = peg(&["validate", &path.display().to_string(), "--fixture", &fixture()]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["explanation"], true);
    assert_eq!(v["complete"], false);
}

#[test]
fn plan_prints_optimal_plan() {
    let o = peg(&["plan", "--fixture", &fixture()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "(visit-park-cheap)\n; cost = 9\n");

    let o = peg(&[
        "plan",
        "--robot-domain",
        &data("rover-domain.pddl").display().to_string(),
        "--robot-problem",
        &data("rover-p01.pddl").display().to_string(),
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outcome"]["status"], "solved");
    assert_eq!(v["outcome"]["plan"]["cost"], 10);
}

#[test]
fn plan_override_must_be_optimal() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.txt");
    std::fs::write(&path, "(outlet-shopping)\n").unwrap();
    let o = peg(&["explain", "--fixture", &fixture(), "--plan", &path.display().to_string()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not optimal"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(peg(&["explain", "--bogus"]).status.code(), Some(2));
    assert_eq!(peg(&["explain", "--fixture", "/no/such/file"]).status.code(), Some(2));
    assert_eq!(peg(&["explain", "--metric", "p7", "--fixture", &fixture()]).status.code(), Some(2));
    assert_eq!(peg(&["explain"]).status.code(), Some(2));
    assert_eq!(peg(&["bench", "--format", "xml"]).status.code(), Some(2));
}

#[test]
fn parse_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.model");
    std::fs::write(&path, "[robot]\ninit: a\nwhatever\n").unwrap();
    let o = peg(&["plan", "--fixture", &path.display().to_string()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn bench_csv_shape() {
    let o = peg(&["bench", "--fixture", &fixture(), "--runs", "4", "--missing-prob", "0.3", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("run,seed,missing_prob"));
    assert!(lines[5].starts_with("mean,"));
    let again = peg(&["bench", "--fixture", &fixture(), "--runs", "4", "--missing-prob", "0.3", "--seed", "1"]);
    let strip = |s: &str| -> Vec<String> {
        s.lines()
            .map(|l| {
                l.split(',')
                    .enumerate()
                    .filter(|(i, _)| *i != 8 && *i != 12)
                    .map(|(_, x)| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect()
    };
    assert_eq!(strip(&text), strip(&stdout(&again)));
}

#[test]
fn sweep_rows_follow_grid() {
    let o = peg(&["sweep", "--fixture", &fixture(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 9);
}

#[test]
fn node_budget_from_environment() {
    let d = data("rover-domain.pddl").display().to_string();
    let p = data("rover-p01.pddl").display().to_string();
    let o = Command::new(env!("CARGO_BIN_EXE_peg"))
        .args(["plan", "--robot-domain", &d, "--robot-problem", &p])
        .env("PEG_NODE_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}
