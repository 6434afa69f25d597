//! Black-box tests of the command line: exit codes, determinism, and table
//! round-trips through the parsers.

use std::path::PathBuf;
use std::process::{Command, Output};

use sensemix::table::{
    parse_check_table, parse_front_table, parse_fuzz_table, parse_mc_table, parse_plan_table,
    write_check_table, write_front_table, write_fuzz_table, write_grid_table, write_mc_table,
    write_plan_table,
};
use sensemix::DesignGrid;

fn sensemix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sensemix"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_text(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf8")
}

fn stderr_text(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf8")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process not killed by signal")
}

fn temp_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sensemix-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir.join(name)
}

const SCENARIO_JSON: &str = r#"{
  "gram": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
  "mean_square_amp": 1.0,
  "snapshots": 10,
  "noise_psd": 1.0,
  "pfa": 0.01,
  "power_budget": 0.3
}"#;

#[test]
fn plan_emits_the_expected_atoms_and_round_trips() {
    let out = sensemix(&["plan", "--budgets", "1,7,15"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let text = stdout_text(&out);
    let rows = parse_plan_table(&text).expect("plan table parses");
    assert_eq!(text, write_plan_table(&rows), "plan table must round-trip");

    let budgets: Vec<f64> = rows.iter().map(|r| r.budget).collect();
    assert_eq!(budgets, vec![1.0, 1.0, 7.0, 7.0, 15.0]);
    for budget in [1.0, 7.0] {
        let atoms: Vec<_> = rows.iter().filter(|r| r.budget == budget).collect();
        assert_eq!(atoms.len(), 2);
        assert_eq!(atoms[0].atom, 0);
        assert_eq!(atoms[0].power, 0.0);
        assert!((atoms[1].power - 9.4070).abs() <= 5e-4);
        let weight_sum: f64 = atoms.iter().map(|r| r.weight).sum();
        assert!((weight_sum - 1.0).abs() <= 1e-12);
        let mean: f64 = atoms.iter().map(|r| r.weight * r.power).sum();
        assert!(
            (mean - budget).abs() <= 1e-11,
            "mean power {mean} at budget {budget}"
        );
        assert!(atoms[1].expected_pd > atoms[1].deterministic_pd);
    }
    let deterministic: Vec<_> = rows.iter().filter(|r| r.budget == 15.0).collect();
    assert_eq!(deterministic.len(), 1);
    assert_eq!(deterministic[0].weight, 1.0);
    assert_eq!(deterministic[0].power, 15.0);
}

#[test]
fn front_and_envelope_tables_round_trip() {
    let out = sensemix(&["front"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let text = stdout_text(&out);
    let rows = parse_front_table(&text).expect("front table parses");
    assert_eq!(text, write_front_table(&rows), "front table must round-trip");
    assert!(rows.len() >= 200);
    assert!(rows.windows(2).all(|w| w[0].xi < w[1].xi));
    assert!(rows[0].is_contact, "zero power is always on the hull");
    assert!(rows.iter().all(|r| r.lambda.is_none() && r.mu.is_none()));

    let out = sensemix(&["envelope"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let text = stdout_text(&out);
    let rows = parse_front_table(&text).expect("envelope table parses");
    assert_eq!(text, write_front_table(&rows), "envelope table must round-trip");
    let contacts: Vec<_> = rows.iter().filter(|r| r.is_contact).collect();
    assert!(contacts.len() >= 2);
    let with_duals = contacts.iter().filter(|r| r.lambda.is_some()).count();
    assert_eq!(
        with_duals,
        contacts.len() - 1,
        "every hull edge carries multipliers, the last contact has no edge"
    );
    assert!(rows
        .iter()
        .filter(|r| !r.is_contact)
        .all(|r| r.lambda.is_none() && r.mu.is_none()));
}

#[test]
fn simulate_emits_three_runs_and_round_trips() {
    let scenario = temp_path("sim-scenario.json");
    std::fs::write(&scenario, SCENARIO_JSON).expect("write scenario");
    let path = scenario.to_str().expect("utf8 path");

    let out = sensemix(&["simulate", "--scenario", path, "--trials", "2000"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let text = stdout_text(&out);
    let rows = parse_mc_table(&text).expect("mc table parses");
    assert_eq!(text, write_mc_table(&rows), "mc table must round-trip");

    let labels: Vec<&str> = rows.iter().map(|r| r.label.as_str()).collect();
    assert_eq!(labels, vec!["false-alarm", "detection", "mixture"]);
    for row in &rows {
        assert_eq!(row.trials, 2000);
        assert!(
            (row.empirical - row.target).abs() <= 4.0 * row.ci_half_width.max(1e-3),
            "{}: empirical {} vs target {}",
            row.label,
            row.empirical,
            row.target
        );
    }
    assert!(rows[0].z_mean.is_some() && rows[1].z_mean.is_some());
    assert!(rows[2].z_mean.is_none(), "mixture runs carry no single statistic mean");
}

#[test]
fn fuzz_round_trips_and_exits_zero() {
    let out = sensemix(&["fuzz", "--cases", "50", "--grid-size", "40"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let text = stdout_text(&out);
    let rows = parse_fuzz_table(&text).expect("fuzz table parses");
    assert_eq!(text, write_fuzz_table(&rows), "fuzz table must round-trip");
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r.pass));
    assert!(rows.iter().all(|r| r.delta.abs() <= 1e-9 * r.oracle_value.abs().max(1.0)));
}

#[test]
fn verify_passes_round_trips_and_exits_zero() {
    let out = sensemix(&["verify", "--trials", "4000", "--fuzz-cases", "40"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let text = stdout_text(&out);
    let rows = parse_check_table(&text).expect("check table parses");
    assert_eq!(text, write_check_table(&rows), "check table must round-trip");
    assert!(rows.iter().all(|r| r.pass), "failing check in: {text}");

    let names: Vec<&str> = rows.iter().map(|r| r.name.as_str()).collect();
    for expected in [
        "lp-oracle-fuzz",
        "plan-structure",
        "plan-kkt",
        "kkt-rejection",
        "eigen-optimality",
        "curve-landmarks",
        "mc-false-alarm",
        "mc-detection",
        "mc-mixture",
    ] {
        assert!(names.contains(&expected), "missing check {expected} in {names:?}");
    }
    assert!(
        !names.contains(&"injected-fault"),
        "fault row must only appear when requested"
    );
}

#[test]
fn verify_with_injected_fault_exits_one_and_names_the_mean_constraint() {
    let out = sensemix(&[
        "verify",
        "--inject-fault",
        "--trials",
        "2000",
        "--fuzz-cases",
        "20",
    ]);
    assert_eq!(exit_code(&out), 1);
    let rows = parse_check_table(&stdout_text(&out)).expect("check table parses");
    let fault = rows
        .iter()
        .find(|r| r.name == "injected-fault")
        .expect("fault row present");
    assert!(!fault.pass, "the corrupted plan must fail certification");
    assert!(
        fault.detail.contains("mean cost") && fault.detail.contains("exceeds budget"),
        "rejection must name the violated mean constraint, got: {}",
        fault.detail
    );
}

#[test]
fn same_seed_is_byte_identical_and_seeds_differ() {
    let scenario = temp_path("det-scenario.json");
    std::fs::write(&scenario, SCENARIO_JSON).expect("write scenario");
    let path = scenario.to_str().expect("utf8 path");

    let args = ["simulate", "--scenario", path, "--trials", "2000", "--seed", "7"];
    let first = sensemix(&args);
    let second = sensemix(&args);
    assert_eq!(exit_code(&first), 0);
    assert_eq!(first.stdout, second.stdout, "same seed must reproduce bytes");

    let other = sensemix(&[
        "simulate", "--scenario", path, "--trials", "2000", "--seed", "8",
    ]);
    assert_ne!(first.stdout, other.stdout, "different seeds must differ");

    let fuzz_a = sensemix(&["fuzz", "--cases", "30", "--seed", "7"]);
    let fuzz_b = sensemix(&["fuzz", "--cases", "30", "--seed", "7"]);
    assert_eq!(fuzz_a.stdout, fuzz_b.stdout);
}

#[test]
fn json_format_is_valid_json_with_the_same_fields() {
    let out = sensemix(&["plan", "--budgets", "7", "--format", "json"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let rows: serde_json::Value =
        serde_json::from_str(&stdout_text(&out)).expect("stdout is json");
    let rows = rows.as_array().expect("json array");
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert!(row.get("budget").is_some());
        assert!(row.get("weight").is_some());
        assert!(row.get("power").is_some());
    }

    let out = sensemix(&["verify", "--trials", "2000", "--fuzz-cases", "20", "--format", "json"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let checks: serde_json::Value =
        serde_json::from_str(&stdout_text(&out)).expect("stdout is json");
    assert!(checks.as_array().expect("json array").len() >= 9);
}

#[test]
fn out_flag_writes_the_table_to_a_file() {
    let target = temp_path("front.csv");
    let target_str = target.to_str().expect("utf8 path");
    let out = sensemix(&["front", "--out", target_str]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    assert!(stdout_text(&out).is_empty(), "table goes to the file, not stdout");
    let text = std::fs::read_to_string(&target).expect("output file exists");
    assert!(parse_front_table(&text).expect("file parses").len() >= 200);
}

#[test]
fn grid_input_feeds_the_front_commands() {
    let mut grid = DesignGrid::new(Vec::new());
    grid.push("idle", 0.0, 0.0);
    grid.push("probe", 1.0, -0.30);
    grid.push("dwell", 2.0, -0.34);
    grid.push("burst", 4.0, -0.60);
    let path = temp_path("designs.csv");
    std::fs::write(&path, write_grid_table(&grid)).expect("write grid");
    let path_str = path.to_str().expect("utf8 path");

    let out = sensemix(&["envelope", "--grid", path_str]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let rows = parse_front_table(&stdout_text(&out)).expect("envelope parses");
    assert_eq!(rows.len(), 4);
    let contacts: Vec<f64> = rows.iter().filter(|r| r.is_contact).map(|r| r.xi).collect();
    assert_eq!(contacts, vec![0.0, 1.0, 4.0], "dwell lies above the hull");
}

#[test]
fn bad_inputs_exit_two_with_an_error_line() {
    let bad = temp_path("bad-scenario.json");
    std::fs::write(&bad, SCENARIO_JSON.replace("0.01", "2.0")).expect("write scenario");
    let out = sensemix(&["plan", "--scenario", bad.to_str().expect("utf8 path")]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_text(&out).starts_with("error:"));

    let out = sensemix(&["plan", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_text(&out).starts_with("error:"));

    let out = sensemix(&["plan", "--budgets", "1,abc"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_text(&out).contains("not a number"));

    let empty = temp_path("empty-grid.csv");
    std::fs::write(&empty, "design_id,cost,perf\n").expect("write grid");
    let out = sensemix(&["front", "--grid", empty.to_str().expect("utf8 path")]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_text(&out).starts_with("error:"));
}
