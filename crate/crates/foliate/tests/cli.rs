//! CLI integration: golden-report regression, CSV tables, custom
//! presentation configs, and failure exit codes.

use std::process::Command;

fn run(args: &[&str]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_foliate"))
        .args(args)
        .output()
        .expect("CLI runs");
    (
        String::from_utf8_lossy(&out.stdout).to_string(),
        out.status.code().unwrap_or(-1),
    )
}

fn strip_timing(json_text: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json_text).expect("valid JSON");
    v.as_object_mut().unwrap().remove("timing_ms");
    v
}

#[test]
fn reports_match_goldens() {
    for (args, golden) in [
        (
            vec!["wn", "--n", "1", "--weight", "0", "--max-degree", "5", "--seed", "7"],
            include_str!("golden/wn_w1_weight0.json"),
        ),
        (
            vec!["site", "--preset", "reeb", "--seed", "7"],
            include_str!("golden/site_reeb.json"),
        ),
        (
            vec!["gk", "--order", "4", "--seed", "7"],
            include_str!("golden/gk_order4.json"),
        ),
    ] {
        let (stdout, code) = run(&args);
        assert_eq!(code, 0, "{args:?} must pass");
        let got = strip_timing(&stdout);
        let want: serde_json::Value = serde_json::from_str(golden).unwrap();
        assert_eq!(got, want, "golden drift for {args:?}");
    }
}

#[test]
fn wn_csv_table() {
    let (stdout, code) = run(&[
        "wn", "--n", "1", "--weight", "0", "--max-degree", "5", "--format", "csv",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.trim().lines().collect();
    assert_eq!(lines[0], "degree,dim,rank_d,betti");
    assert_eq!(lines[1], "0,1,0,1");
    // the weight-zero piece carries the degree-3 class
    assert_eq!(lines[4], "3,1,0,1");
}

#[test]
fn reeb_csv_has_header_and_rows() {
    let (stdout, code) = run(&[
        "reeb", "--orders", "2", "--grid", "2", "--precision", "192", "--format", "csv",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.trim().lines().collect();
    assert_eq!(lines[0], "quantity,k,t,value");
    assert!(lines.len() >= 5);
    assert!(lines[1].starts_with("|f^(2)/(f')^2|,1,9/10,"));
}

#[test]
fn custom_presentation_config() {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/parabola.toml");
    let (stdout, code) = run(&["cech", "--config", config, "--samples", "6", "--seed", "3"]);
    assert_eq!(code, 0, "custom presentation checks must pass: {stdout}");
    let v = strip_timing(&stdout);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "delta-squared-zero-on-random-cochains"
        && c["pass"] == true));
}

#[test]
fn failing_math_check_exits_one() {
    let (_, code) = run(&["site", "--preset", "reeb-empty-cover"]);
    assert_eq!(code, 1);
}

#[test]
fn config_errors_exit_two() {
    let (_, code) = run(&["cech", "--config", "/nonexistent/path.toml"]);
    assert_eq!(code, 2);
    let (_, code) = run(&["reeb", "--precision", "64"]);
    assert_eq!(code, 2);
    let (_, code) = run(&["probe", "--candidate", "nonsense"]);
    assert_eq!(code, 2);
}

#[test]
fn probe_rejects_bad_candidates_via_checks() {
    // closed but not periodic: a0 da0
    let (stdout, code) = run(&[
        "probe", "--candidate", "custom", "--lambda", "a0: a0", "--grid", "2", "--order", "3",
    ]);
    assert_eq!(code, 1, "non-periodic candidate is a failed math check");
    let v = strip_timing(&stdout);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .any(|c| c["name"] == "candidate-periodic" && c["pass"] == false));
}

#[test]
fn precision_env_var_is_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_foliate"))
        .args(["reeb", "--orders", "2", "--grid", "2"])
        .env("FOLIATE_PRECISION_BITS", "192")
        .output()
        .expect("CLI runs");
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["precision"], 192);
}
