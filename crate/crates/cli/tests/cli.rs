use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn ftlcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftlcheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = ftlcheck(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(args: &[&str]) -> i32 {
    ftlcheck(args).status.code().expect("exit code")
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn superluminal_scenario_certifies_a_clone() {
    let r = json(&[
        "scenario",
        "--speed",
        "2",
        "--separation",
        "2",
        "--seed",
        "7",
    ]);
    assert_eq!(r["verdict"], "clone_certified");
    assert_eq!(r["interval"]["kind"], "spacelike");
    assert!((num(&r["verify_c_prob"]) - 1.0).abs() < 1e-9);
    assert!((num(&r["verify_b_prob"]) - 1.0).abs() < 1e-9);
    let w = &r["clone_window"];
    assert!(num(&w["start"]) < num(&w["end"]));
    assert!(r["frame_note"].as_str().is_some());
}

#[test]
fn verdicts_across_speeds() {
    for (speed, verdict) in [
        ("0.5", "consistent_subluminal"),
        ("1", "lightlike_boundary"),
        ("10", "clone_certified"),
        ("inf", "clone_certified"),
    ] {
        let r = json(&["scenario", "--speed", speed, "--seed", "1"]);
        assert_eq!(r["verdict"], verdict, "speed {speed}");
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = [
        "scenario", "--speed", "3", "--seed", "42", "--input", "haar",
    ];
    assert_eq!(ftlcheck(&args).stdout, ftlcheck(&args).stdout);
    let teleport = ["teleport", "--seed", "9", "--resource", "random"];
    assert_eq!(ftlcheck(&teleport).stdout, ftlcheck(&teleport).stdout);
}

#[test]
fn report_frame_changes_coordinates_only() {
    let base = json(&["scenario", "--speed", "2", "--seed", "3"]);
    let lab = json(&[
        "scenario",
        "--speed",
        "2",
        "--seed",
        "3",
        "--frame-beta",
        "0",
    ]);
    assert_eq!(base["verdict"], lab["verdict"]);
    assert_eq!(base["verify_b_prob"], lab["verify_b_prob"]);
    assert_eq!(base["clone_window"], lab["clone_window"]);
    assert_eq!(lab["report_frame"]["event_ii"]["t"], 1.0);
    assert!(lab["report_frame"]["clone_window"].is_null());
    assert!(num(&base["report_frame"]["event_ii"]["t"]) < 0.0);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"signal_speed": 0.5, "separation": 4, "input_spec": {"named": "plus"},
            "resource_spec": "phi_plus", "seed": 11}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let r = json(&["scenario", "--config", c]);
    assert_eq!(r["verdict"], "consistent_subluminal");
    assert_eq!(r["config"]["seed"], 11);

    let r = json(&["scenario", "--config", c, "--speed", "infinite"]);
    assert_eq!(r["verdict"], "clone_certified");
    assert_eq!(r["config"]["signal_speed"], "infinite");
    assert_eq!(r["config"]["separation"], 4.0);
    assert_eq!(r["event_ii"]["t"], 0.0);

    let out = dir.path().join("report.json");
    let o = out.to_str().unwrap();
    assert_eq!(code(&["scenario", "--config", c, "--out", o]), 0);
    let written: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written["config"]["resource_spec"], "phi_plus");
}

#[test]
fn bad_input_exits_with_validation_code() {
    assert_eq!(code(&["scenario", "--speed", "2"]), 2);
    assert_eq!(code(&["scenario", "--speed", "-1", "--seed", "1"]), 2);
    assert_eq!(
        code(&[
            "scenario",
            "--speed",
            "2",
            "--seed",
            "1",
            "--separation",
            "0"
        ]),
        2
    );
    assert_eq!(
        code(&[
            "scenario",
            "--speed",
            "2",
            "--seed",
            "1",
            "--frame-beta",
            "1"
        ]),
        2
    );
    assert_eq!(code(&["teleport", "--input", "up"]), 2);
    assert_eq!(code(&["teleport", "--seed", "1", "--input", "singlet"]), 2);
    assert_eq!(
        code(&["frame", "--t1", "0", "--x1", "0", "--t2", "0", "--x2", "0"]),
        2
    );

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(
        &cfg,
        r#"{"signal_speed": 2, "separation": 1, "input_spec": "haar_random",
        "resource_spec": "singlet", "seed": 1, "colour": "red"}"#,
    )
    .unwrap();
    assert_eq!(code(&["scenario", "--config", cfg.to_str().unwrap()]), 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(
        code(&["scenario", "--config", missing.to_str().unwrap()]),
        1
    );
}

#[test]
fn teleport_reports_exact_transfer() {
    let r = json(&[
        "teleport",
        "--seed",
        "5",
        "--input",
        "plus",
        "--resource",
        "random",
    ]);
    assert!(num(&r["transcript"]["output_fidelity"]) >= 1.0 - 1e-9);
    for p in r["outcome_distribution"].as_array().unwrap() {
        assert!((num(p) - 0.25).abs() < 1e-10);
    }
    let bits = r["transcript"]["message"]["bits"].as_u64().unwrap();
    assert!(bits < 4);
}

#[test]
fn clone_check_on_the_basis_copier() {
    let r = json(&["clone-check"]);
    let f: Vec<(String, f64)> = r["fidelities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p[0].as_str().unwrap().to_string(), num(&p[1])))
        .collect();
    assert!(f.contains(&("up".into(), 1.0)));
    let plus = f.iter().find(|(k, _)| k == "plus").unwrap().1;
    assert!((plus - 0.5).abs() < 1e-9);
    assert_eq!(r["witness"]["violation"], true);

    let r = json(&["clone-check", "--alpha", "1", "--beta", "0"]);
    assert_eq!(r["witness"]["violation"], false);
    assert_eq!(code(&["clone-check", "--alpha", "1", "--beta", "1"]), 2);
}

#[test]
fn clone_check_accepts_a_candidate_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("identity.json");
    let rows: Vec<Vec<[f64; 2]>> = (0..8)
        .map(|i| {
            (0..8)
                .map(|j| [if i == j { 1.0 } else { 0.0 }, 0.0])
                .collect()
        })
        .collect();
    let body = serde_json::json!({ "unitary": rows, "apparatus_qubits": 1 });
    fs::write(&path, body.to_string()).unwrap();
    let p = path.to_str().unwrap();
    let r = json(&["clone-check", "--candidate", p]);
    let down = r["fidelities"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e[0] == "down")
        .map(|e| num(&e[1]))
        .unwrap();
    assert!(down.abs() < 1e-12);
    assert_eq!(r["witness"]["vacuous"], true);

    let bad =
        serde_json::json!({ "unitary": [[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]] });
    fs::write(&path, bad.to_string()).unwrap();
    assert_eq!(code(&["clone-check", "--candidate", p]), 2);
}

#[test]
fn nosignal_gap_vanishes() {
    let r = json(&["nosignal", "--seed", "2", "--ops", "120"]);
    assert!(num(&r["gap"]) <= 1e-10);
    assert_eq!(r["operations"].as_array().unwrap().len(), 121);
    assert_eq!(code(&["nosignal"]), 2);
}

#[test]
fn frame_query_matches_boost_arithmetic() {
    let r = json(&[
        "frame", "--t1", "0", "--x1", "0", "--t2", "1", "--x2", "2", "--beta", "0.75",
    ]);
    assert!((num(&r["reversing_boost"]["threshold"]) - 0.5).abs() < 1e-12);
    let gamma = 1.0 / (1.0f64 - 0.5625).sqrt();
    assert!((num(&r["boosted"]["e2"]["t"]) - gamma * (1.0 - 1.5)).abs() < 1e-12);
    assert_eq!(r["boosted"]["reversed"], true);

    let r = json(&["frame", "--t1", "0", "--x1", "0", "--t2", "-2", "--x2", "1"]);
    assert_eq!(r["interval"]["kind"], "timelike");
    assert!(r["reversing_boost"].is_null());
}

#[test]
fn diagram_json_and_svg() {
    let boosted = json(&["diagram", "--speed", "2", "--seed", "1"]);
    let lab = json(&[
        "diagram",
        "--speed",
        "2",
        "--seed",
        "1",
        "--frame-beta",
        "0",
    ]);
    let count = |d: &Value, k: &str| d[k].as_array().unwrap().len();
    assert_eq!(count(&boosted, "events"), count(&lab, "events"));
    assert_eq!(count(&boosted, "polylines"), count(&lab, "polylines"));

    let out = ftlcheck(&["diagram", "--speed", "2", "--seed", "1", "--svg"]);
    assert!(out.status.success());
    let svg = String::from_utf8(out.stdout).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}
