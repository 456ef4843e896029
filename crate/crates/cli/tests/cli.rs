use std::path::Path;
use std::process::{Command, Output};

fn obroute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obroute"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn route_grid_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = obroute(&[
        "route",
        "--generate",
        "grid:4x4",
        "--scheme",
        "reference",
        "--demands",
        "permutation",
        "--seed",
        "1",
        "--samples",
        "100",
        "--out-dir",
        out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    let res = &r["results"][0];
    assert_eq!(res["scheme"], "reference");
    assert!(res["competitive_ratio"].as_f64().unwrap() >= 1.0 - 1e-9);
    assert!(r["tree"]["height"].as_u64().unwrap() >= 1);
    assert!(r["tree"]["c_cert"].as_f64().unwrap() >= 1.0);
    assert!(r["generated_at"].is_u64());
    let loads = std::fs::read_to_string(dir.path().join("loads.csv")).unwrap();
    assert_eq!(loads.lines().count(), 1 + 24);
    assert!(dir.path().join("tables.csv").exists());

    let o = obroute(&["report", "--out-dir", out]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("PASS reference: load bound"));
}

#[test]
fn single_edge_from_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("edge.txt"), "2 1\n0 1 1\n").unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "graph = edge.txt\nschemes = reference,impl-a\ndemands = gravity\nsamples = 5\nassert_max_ratio = 1.0\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = obroute(&[
        "route",
        "--config",
        dir.path().join("run.cfg").to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(
        o.status.success(),
        "{}{}",
        stdout(&o),
        String::from_utf8_lossy(&o.stderr)
    );
    for res in report(&out)["results"].as_array().unwrap() {
        assert!((res["competitive_ratio"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn failed_assertion_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "generate = grid:3x3\nsamples = 20\nassert_max_ratio = 0.5\n",
    )
    .unwrap();
    let o = obroute(&[
        "route",
        "--config",
        dir.path().join("run.cfg").to_str().unwrap(),
        "--out-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL reference: competitive ratio"));
}

#[test]
fn impl_b_rejects_non_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let o = obroute(&[
        "route",
        "--generate",
        "grid:3x3:1-4",
        "--scheme",
        "impl-b",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("uniform capacities"));
}

#[test]
fn build_and_audit() {
    let o = obroute(&["build", "--generate", "grid:4x4", "--arity", "2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["graph"]["n"], 16);
    assert_eq!(v["degree"], 2);
    let o = obroute(&["audit", "--generate", "random_regular:16:3", "--seed", "4"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 violations"));
}

#[test]
fn bad_arguments() {
    assert_eq!(obroute(&["route"]).status.code(), Some(2));
    let o = obroute(&["route", "--generate", "grid:2x2", "--scheme", "impl-z"]);
    assert!(!o.status.success());
    let o = obroute(&["build", "--graph", "/nonexistent/graph.txt"]);
    assert_eq!(o.status.code(), Some(2));
}
