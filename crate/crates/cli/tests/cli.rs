use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use smash_core::bench::blocked_instance;
use smash_core::domain::{parse_plan, write_instance, ActionOptions};
use smash_core::scoop::build_scoop_demo_instance;

fn smash(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smash")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = smash(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn shipped_data_matches_builders() {
    assert_eq!(fs::read_to_string(data("scoop_demo.toml")).unwrap(), write_instance(&build_scoop_demo_instance()));
    assert_eq!(fs::read_to_string(data("blocked.toml")).unwrap(), write_instance(&blocked_instance(ActionOptions::TOPPLE)));
}

#[test]
fn plan_validate_simulate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = data("blocked.toml");
    let plan = dir.path().join("plan.toml");
    let inst_s = inst.to_str().unwrap();
    let plan_s = plan.to_str().unwrap();

    let out = smash(&["plan", inst_s, "--budget-ms", "5000", "--out", plan_s]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("status optimal objective 2"));
    assert_eq!(parse_plan(&fs::read_to_string(&plan).unwrap()).unwrap().actions.len(), 2);

    let report = ok(&["validate", inst_s, plan_s]);
    assert!(report.contains("success = true"));

    let sim = ok(&["simulate", inst_s, plan_s, "--dispersion", "0"]);
    assert!(sim.starts_with("success = true"));
    let mc = ok(&["simulate", inst_s, plan_s, "--trials", "20", "--dispersion", "0"]);
    assert!(mc.contains("success_rate = 1"));
}

#[test]
fn no_topple_flag_changes_the_optimum() {
    let out = smash(&["plan", data("blocked.toml").to_str().unwrap(), "--no-topple", "--budget-ms", "5000"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("objective 4"));
}

#[test]
fn validate_reports_illegal_plan() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("bad.toml");
    fs::write(&plan, "[[actions]]\nkind = \"pick_place\"\nfrom = 2\nto = 1\n").unwrap();
    let report = ok(&["validate", data("blocked.toml").to_str().unwrap(), plan.to_str().unwrap()]);
    assert!(report.contains("success = false"));
    assert!(report.contains("failed_step = 0"));
}

#[test]
fn export_lp_writes_sections() {
    let text = ok(&["export-lp", data("blocked.toml").to_str().unwrap(), "--horizon", "3"]);
    assert!(text.contains("Minimize"));
    assert!(text.contains("Subject To"));
    assert!(text.trim_end().ends_with("End"));
}

#[test]
fn gen_is_reproducible() {
    let a = ok(&["gen", "multi", "--objects", "5", "--buffers", "2", "--seed", "7"]);
    let b = ok(&["gen", "multi", "--objects", "5", "--buffers", "2", "--seed", "7"]);
    assert_eq!(a, b);
    assert!(a.contains("multi_l5_s7"));
}

#[test]
fn bench_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    ok(&[
        "bench", "--protocol", "single", "--sizes", "4", "--instances", "2", "--budget-ms", "2000", "--out",
        out.to_str().unwrap(),
    ]);
    let csv = fs::read_to_string(out.join("rows.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    assert!(out.join("summary.txt").exists());
}

#[test]
fn ablate_writes_heatmaps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("abl");
    ok(&[
        "ablate", "--budgets", "200,400", "--buffer-list", "0,2", "--instances", "2", "--out",
        out.to_str().unwrap(),
    ]);
    let cells = fs::read_to_string(out.join("cells.csv")).unwrap();
    assert_eq!(cells.lines().count(), 1 + 2 * 2 * 2);
    for name in ["success_topple.svg", "actions_topple.svg", "success_no_topple.svg", "actions_no_topple.svg"] {
        assert!(fs::read_to_string(out.join(name)).unwrap().starts_with("<svg"), "{name}");
    }
}

#[test]
fn bad_arguments_fail() {
    assert!(!smash(&["plan", "/nonexistent/instance.toml"]).status.success());
    assert!(!smash(&["frobnicate"]).status.success());
}
