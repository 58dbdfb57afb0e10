use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use omnicrawl::design::REFERENCE_STIFFNESS;
use omnicrawl_cli::report::SWEEP_CSV_HEADER;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_omnicrawl"))
}

fn table_i() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/tableI.toml")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_reports_posture_and_torques() {
    let cfg = table_i();
    let o = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("theta1 = 114.6243 deg"), "{text}");
    assert!(text.contains("theta2 = 65.3757 deg"), "{text}");
    for j in 1..=4 {
        assert!(text.contains(&format!("J{j} ")), "{text}");
    }
}

#[test]
fn json_round_trip_passes_check() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("solution.json");
    let o = run(&["solve", "--format", "json", "--output", sol.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    for key in ["posture_deg", "forces_N", "torques_Nm", "objective_Nm", "margins", "variant"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["forces_N"]["F"].as_array().unwrap().len(), 3);
    assert_eq!(v["torques_Nm"].as_array().unwrap().len(), 4);

    let o = run(&["check", "--state", sol.to_str().unwrap(), "--tolerance", "1e-8", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["pass"], true);
    assert!(report["max_equality_residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn round_trip_symmetry_corrected_keeps_variant() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("s.json");
    let o = run(&[
        "solve", "--variant", "symmetry_corrected", "--mu", "0.55", "--format", "json", "-o",
        sol.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    // The recorded scenario wins over the built-in default.
    let o = run(&["check", "--state", sol.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // Checked against the other variant it no longer balances.
    let o = run(&["check", "--state", sol.to_str().unwrap(), "--variant", "as_printed"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn zero_state_fails_check_on_vertical_balance() {
    let dir = tempfile::tempdir().unwrap();
    let zeros = dir.path().join("zeros.json");
    std::fs::write(&zeros, "[0, 0, 0, 0, 0, 0, 0, 0, 0, 0]").unwrap();
    let o = run(&["check", "--state", zeros.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["pass"], false);
    let rows = report["equality_residuals"].as_array().unwrap();
    let fy = rows.iter().find(|r| r[0] == "sum_fy").unwrap()[1].as_f64().unwrap();
    assert!((fy.abs() - 4.8069).abs() < 1e-9, "{fy}");

    let o = run(&["check", "--state", zeros.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("sum_fy off by -4.8069 N"), "{}", stdout(&o));
}

#[test]
fn zero_solution_file_uses_same_schema() {
    let dir = tempfile::tempdir().unwrap();
    let zeros = dir.path().join("zeros.json");
    std::fs::write(
        &zeros,
        r#"{"forces_N": {"F": [0, 0, 0], "N": [0, 0, 0]}, "torques_Nm": [0, 0, 0, 0]}"#,
    )
    .unwrap();
    let o = run(&["check", "--state", zeros.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_csv_header_and_row_count() {
    let o = run(&["sweep", "--d", "0.065:0.10:50", "--mu", "0.3:0.9:50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(SWEEP_CSV_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2500);
    assert!(rows.iter().all(|r| r.split(',').count() == 5));
}

#[test]
fn sweep_csv_matches_golden_file() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/sweep_small.csv");
    let o = run(&["sweep", "--d", "0.05:0.2:4", "--mu", "0:0.9:3"]);
    assert_eq!(o.status.code(), Some(0));
    let expected = std::fs::read_to_string(golden).unwrap();
    assert_eq!(stdout(&o), expected);
    // Stable across runs.
    assert_eq!(stdout(&run(&["sweep", "--d", "0.05:0.2:4", "--mu", "0:0.9:3"])), expected);
}

#[test]
fn malformed_config_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(table_i()).unwrap().replace("link_mass_kg", "link_mas_kg");
    std::fs::write(&bad, text).unwrap();
    let o = run(&["solve", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line"), "{err}");
    assert!(err.contains("link_mas_kg"), "{err}");

    std::fs::write(&bad, "[robot\nmodule_mass_kg = 1").unwrap();
    let o = run(&["solve", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(run(&["sweep", "--d", "0.1:0.2"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--mu", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["check", "--state", "/nonexistent/state.json"]).status.code(), Some(2));
    assert_eq!(run(&["stiffness", "--torques", "1,2,3"]).status.code(), Some(2));
}

#[test]
fn frictionless_pipe_exits_1() {
    let o = run(&["solve", "--mu", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("NoStaticEquilibrium"), "{}", stderr(&o));
}

#[test]
fn oversized_pipe_exits_1() {
    let o = run(&["solve", "--d", "0.3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("GeometryInfeasible"), "{}", stderr(&o));
}

#[test]
fn stiffness_from_reference_torques() {
    let o = run(&["stiffness", "--torques", "0.2359,0.3683,0.2760,0.1310", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let k: Vec<f64> = v["stiffness"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (got, want) in k.iter().zip(REFERENCE_STIFFNESS) {
        assert!(((got - want) / want).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn stiffness_rejects_zero_deflection() {
    // Rounded rest angles still leave a deflection above the floor; exact
    // ones leave none.
    let o = run(&["stiffness", "--rest-angles", "24.6243,114.6243,65.3757,24.6243"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&[
        "stiffness",
        "--rest-angles",
        "24.62431835216407,114.62431835216407,65.37568164783593,24.62431835216407",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("ZeroDeflection"), "{}", stderr(&o));
}

#[test]
fn oracle_agrees_at_baseline() {
    let o = run(&["oracle", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["agree"], true);
    assert_eq!(v["null_space_dimension"], 3);
}

#[test]
fn variants_csv_lists_both() {
    let o = run(&["variants", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("as_printed,"));
    assert!(lines[2].starts_with("symmetry_corrected,"));
}

#[test]
fn output_flag_overrides_config_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let to_cfg = dir.path().join("from_config.csv");
    let text = std::fs::read_to_string(table_i())
        .unwrap()
        + &format!("\n[output]\nformat = \"csv\"\npath = {:?}\n", to_cfg.to_str().unwrap());
    std::fs::write(&cfg, text).unwrap();

    let o = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&to_cfg).unwrap().starts_with("theta1_deg,"));

    let explicit = dir.path().join("explicit.json");
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--format", "json", "-o", explicit.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&explicit).unwrap().starts_with('{'));
}
