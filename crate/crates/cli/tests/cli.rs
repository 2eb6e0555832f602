//! End-to-end tests of the `dslab` binary: exit codes, output schemas,
//! and the documented invocations from the usage docs.

use std::path::Path;
use std::process::{Command, Output};

use dslab_core::report::VerificationReport;
use serde_json::Value;

fn dslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dslab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process not killed by signal")
}

#[test]
fn verify_reports_deserialize_into_the_declared_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gamma.json");
    let out = dslab(&[
        "verify", "gamma", "--mu-max", "2", "--nu-max", "2", "--r-max", "4",
        "-o", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);

    // deny_unknown_fields on VerificationReport makes this a schema check,
    // not just a parse check.
    let body = std::fs::read_to_string(&path).unwrap();
    let reports: Vec<VerificationReport> = serde_json::from_str(&body).unwrap();
    assert!(!reports.is_empty());
    assert!(reports.iter().all(|r| r.pass));
    assert!(reports.iter().all(|r| r.method == "exact" && r.tolerance == 0.0));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = dslab(&["verify", "bogus"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn malformed_rational_is_a_usage_error() {
    for bad in ["abc", "1/0", "3/-2"] {
        let out = dslab(&["pmf", "s", "--kind", "pm", "--p", bad, "--n", "4"]);
        assert_eq!(code(&out), 2, "p = {bad} should be rejected");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn zero_horizon_simulation_is_rejected() {
    let out = dslab(&[
        "simulate", "t", "--kind", "pm", "--p", "1/2", "--a", "1", "--horizon", "0",
    ]);
    assert_eq!(code(&out), 2);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("horizon"), "stderr: {msg}");
}

#[test]
fn horizon_below_target_level_is_rejected() {
    let out = dslab(&[
        "simulate", "t", "--kind", "pm", "--p", "1/2", "--a", "5", "--horizon", "3",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[walks]\nbogus_key = 3\n").unwrap();
    let out = dslab(&["verify", "walks", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid config"));
}

#[test]
fn bridge_return_table_matches_documented_example() {
    let out = dslab(&["pmf", "bridge", "--mu", "1", "--nu", "0", "--r", "2"]);
    let value = stdout_json(&out);
    assert_eq!(value["law"], "bridge_first_return");
    assert_eq!(value["p"], "any");
    let masses = value["masses"].as_array().unwrap();
    let pairs: Vec<(i64, &str)> = masses
        .iter()
        .map(|m| (m["n"].as_i64().unwrap(), m["mass"].as_str().unwrap()))
        .collect();
    assert_eq!(pairs, vec![(2, "2/3"), (4, "1/3")]);
}

#[test]
fn first_passage_table_contains_known_mass() {
    let out = dslab(&[
        "pmf", "t", "--kind", "pm", "--p", "1/2", "--a", "1", "--horizon", "9",
    ]);
    let value = stdout_json(&out);
    let masses = value["masses"].as_array().unwrap();
    // P{T_1 = 3} = 1/8 for the symmetric +-1 walk.
    assert!(masses
        .iter()
        .any(|m| m["n"] == 3 && m["mass"] == "1/8"));
    // Mass not yet absorbed by the horizon, kept exact.
    assert_eq!(value["tail_bound"], "63/256");
}

#[test]
fn pmf_csv_rows_carry_rational_and_float_columns() {
    let out = dslab(&[
        "pmf", "s", "--kind", "nd", "--p", "1/3", "--n", "2", "--format", "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,mass_rational,mass_float"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("0,4/9,"));
    assert!(rows[1].starts_with("1,4/9,"));
    assert!(rows[2].starts_with("2,1/9,"));
}

#[test]
fn series_coefficients_match_first_passage_masses() {
    let out = dslab(&[
        "series", "passage", "--kind", "pm", "--p", "1/2", "--level", "1", "--order", "7",
    ]);
    let value = stdout_json(&out);
    assert_eq!(value["order"], 7);
    let coeffs: Vec<&str> = value["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(
        coeffs,
        vec!["0/1", "1/2", "0/1", "1/8", "0/1", "1/16", "0/1", "5/128"]
    );
}

#[test]
fn negative_levels_are_accepted_where_the_walk_is_two_sided() {
    let out = dslab(&[
        "series", "position", "--kind", "pm", "--p", "1/2", "--level", "-2", "--order", "6",
    ]);
    let value = stdout_json(&out);
    // P{S_2 = -2} = 1/4 at p = 1/2.
    assert_eq!(value["coefficients"][2], "1/4");

    // The one-sided walk never goes below zero.
    let out = dslab(&[
        "series", "position", "--kind", "nd", "--p", "1/2", "--level", "-2", "--order", "6",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn simulation_output_is_seed_deterministic() {
    let run = |seed: &str| {
        let out = dslab(&[
            "simulate", "s", "--kind", "pm", "--p", "1/2", "--n", "6",
            "--samples", "20000", "--seed", seed,
        ]);
        assert_eq!(code(&out), 0);
        out.stdout
    };
    let first = run("7");
    assert_eq!(first, run("7"), "same seed must reproduce byte for byte");
    assert_ne!(first, run("8"), "different seeds should move the counts");
}

#[test]
fn simulate_emits_empirical_law_and_report() {
    let out = dslab(&[
        "simulate", "bridge", "--p", "1/2", "--r", "2", "--samples", "10000",
    ]);
    let value = stdout_json(&out);
    let law = &value["empirical"];
    assert_eq!(law["seed"], 42);
    // Bridge sampling rejects paths that fail to return; `samples` counts
    // the kept ones, roughly C(4,2)/2^4 = 3/8 of the 10000 launched.
    let kept = law["samples"].as_u64().unwrap();
    assert!((3000..5000).contains(&kept), "kept {kept}");
    let counted: u64 = law["counts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["count"].as_u64().unwrap())
        .sum();
    assert_eq!(counted + law["censored"].as_u64().unwrap(), kept);

    let report: VerificationReport =
        serde_json::from_value(value["report"].clone()).unwrap();
    assert_eq!(report.identity_id, "walk/bridge_return_law");
    assert!(report.pass, "seed-fixed run is expected to fit");
}

#[test]
fn impossible_tolerance_turns_failures_into_exit_one() {
    let out = dslab(&["verify", "integrals", "--tolerance", "1e-18"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("failures"));
}

#[test]
fn config_file_shrinks_the_walk_grid() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("grid.toml");
    std::fs::write(
        &config,
        "[walks]\nlevel_max = 2\nn_max = 6\nprobabilities = [\"1/2\"]\n\n\
         [bridge]\nr_max = 3\nprobabilities = [\"1/2\", \"1/3\"]\n",
    )
    .unwrap();
    let csv = dir.path().join("walks.csv");
    let out = dslab(&[
        "verify", "walks",
        "--config", config.to_str().unwrap(),
        "--format", "csv",
        "-o", csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);

    let body = std::fs::read_to_string(&csv).unwrap();
    let mut lines = body.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("identity_id,method,params"));
    // 2 kinds x 1 p x (11 hitting + 3 x 10 splits) + 2 x 6 negbinom pairs
    // on the walk grid, plus the bridge sweep at two probabilities.
    assert_eq!(lines.clone().count(), 374);
    assert!(lines.all(|row| row.contains(",true,") || row.ends_with(",true")));
}

fn repo_file(rel: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

#[test]
fn report_schema_file_matches_emitted_reports() {
    let schema: Value = serde_json::from_str(
        &std::fs::read_to_string(repo_file("docs/report-schema.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(schema["type"], "array");

    let item = &schema["items"];
    let required: Vec<&str> = item["required"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();

    let out = dslab(&["verify", "gamma", "--mu-max", "1", "--nu-max", "1", "--r-max", "2"]);
    let reports = stdout_json(&out);
    for report in reports.as_array().unwrap() {
        let fields = report.as_object().unwrap();
        for name in &required {
            assert!(fields.contains_key(*name), "missing required field {name}");
        }
        for name in fields.keys() {
            assert!(
                item["properties"].get(name).is_some(),
                "emitted field {name} is not in the schema"
            );
        }
    }
}
