use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["xchannel"];
    full.extend_from_slice(args);
    let code = xchannel_cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs").join(name);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(schema_file: &str, json: &str) -> Value {
    let value: Value = serde_json::from_str(json).unwrap();
    let v = schema(schema_file);
    if let Err(e) = v.validate(&value) {
        panic!("{schema_file}: {e}");
    }
    value
}

#[test]
fn table1_csv_has_header_and_18_rows() {
    let (code, out, err) = run(&["table1"]);
    assert_eq!(code, 0, "{err}");
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    let header = reader.headers().unwrap().clone();
    assert_eq!(&header[0], "pattern");
    assert!(header.iter().any(|h| h == "failed_condition"));
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 18);
    assert_eq!(rows.iter().filter(|r| &r[3] == "synergistic").count(), 11);
    let blind = rows.iter().find(|r| &r[0] == "NN,ND,DD,PN").unwrap();
    assert_eq!((&blind[3], &blind[6]), ("dissociative", "3"));
    assert!(err.contains("matches reference table: yes"));
}

#[test]
fn table1_json_round_trips() {
    let (code, out, _) = run(&["table1", "--format", "json"]);
    assert_eq!(code, 0);
    let value = assert_valid("table1.schema.json", &out);
    let verdicts = |v: &Value| -> BTreeSet<(String, String)> {
        v["candidates"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| {
                (
                    c["pattern"].as_str().unwrap().to_string(),
                    c["verdict"].as_str().unwrap().to_string(),
                )
            })
            .collect()
    };
    let again: Value = serde_json::from_str(&serde_json::to_string(&value).unwrap()).unwrap();
    assert_eq!(verdicts(&value), verdicts(&again));
    assert_eq!(verdicts(&value).len(), 18);
    assert_eq!(value["synergistic"], 11);
}

#[test]
fn simulate_reports_success_and_dof() {
    let (code, out, err) = run(&[
        "simulate",
        "--pattern",
        "DD,ND,PN,NN",
        "--trials",
        "500",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0, "{err}");
    let v = assert_valid("simulate.schema.json", &out);
    assert_eq!(v["success_rate"], 1.0);
    assert_eq!(v["dof"], "5/4");
    assert_eq!(v["forbidden"], 0);
    assert_eq!(v["rows"].as_array().unwrap().len(), 500);
    assert!(err.contains("dof 5/4"));
}

#[test]
fn simulate_rejects_dissociative_pattern() {
    let (code, _, err) = run(&["simulate", "--pattern", "NN,NN,NN,NN"]);
    assert_eq!(code, 2);
    assert!(err.contains("not synergistic"));
    let (code, _, err) = run(&["simulate", "--pattern", "NN,NN,NN,NN", "--allow-dissociative"]);
    assert_eq!(code, 1);
    assert!(err.contains("condition 3"), "{err}");
}

#[test]
fn simulate_is_byte_identical() {
    let args = [
        "simulate",
        "--pattern",
        "DN,ND,PD,NN",
        "--trials",
        "300",
        "--seed",
        "9",
        "--noise-power",
        "0.01",
    ];
    let (c1, a, _) = run(&args);
    let (c2, b, _) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let (_, other, _) = run(&[
        "simulate",
        "--pattern",
        "DN,ND,PD,NN",
        "--trials",
        "300",
        "--seed",
        "10",
        "--noise-power",
        "0.01",
    ]);
    assert_ne!(a, other);
}

#[test]
fn simulate_mirror_pattern() {
    let (code, _, err) = run(&["simulate", "--pattern", "DD,DN,NP,NN", "--trials", "200"]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("(mirrored)"));
}

#[test]
fn rate_sweep_slope_and_baseline() {
    let (code, out, err) = run(&["rate-sweep", "--pattern", "ND,ND,DN,PN", "--format", "json"]);
    assert_eq!(code, 0, "{err}");
    let v = assert_valid("rate-sweep.schema.json", &out);
    let slope = v["slope"].as_f64().unwrap();
    assert!((1.20..=1.30).contains(&slope), "{slope}");
    assert!((v["top_half_slope"].as_f64().unwrap() - slope).abs() < 0.02);
    assert_eq!(v["baseline"], "67/60");
    assert!(err.contains("baseline 67/60"));
    assert_eq!(v["points"].as_array().unwrap().len(), 5);
}

#[test]
fn rate_sweep_mirror_matches() {
    let slope = |p: &str| {
        let (code, out, _) = run(&["rate-sweep", "--pattern", p, "--format", "json", "--trials", "500"]);
        assert_eq!(code, 0);
        serde_json::from_str::<Value>(&out).unwrap()["slope"].as_f64().unwrap()
    };
    assert!((slope("DD,PN,ND,NN") - slope("DD,NP,DN,NN")).abs() < 0.01);
}

#[test]
fn usage_errors() {
    assert_eq!(
        run(&["rate-sweep", "--pattern", "ND,ND,DN,PN", "--power-points", "1"]).0,
        2
    );
    assert_eq!(
        run(&[
            "rate-sweep",
            "--pattern",
            "ND,ND,DN,PN",
            "--power-min-exp",
            "40",
            "--power-max-exp",
            "20"
        ])
        .0,
        2
    );
    assert_eq!(run(&["simulate", "--pattern", "DD,ND,PN,NN", "--trials", "0"]).0, 2);
    assert_eq!(run(&["simulate", "--pattern", "DD,ND,PN"]).0, 2);
    assert_eq!(run(&["simulate", "--pattern", "XX,ND,PN,NN"]).0, 2);
    assert_eq!(
        run(&["simulate", "--pattern", "DD,ND,PN,NN", "--noise-power", "-1"]).0,
        2
    );
    assert_eq!(run(&["bogus"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let (code, out, _) = run(&["table1", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 19);
    let missing = dir.path().join("no/such/dir/t.csv");
    assert_eq!(run(&["table1", "--out", missing.to_str().unwrap()]).0, 3);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_xchannel");
    let status = Command::new(bin).arg("table1").output().unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&status.stdout).starts_with("pattern,"));
    let status = Command::new(bin)
        .args(["simulate", "--pattern", "NN,ND,DD,PN", "--allow-dissociative"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    let status = Command::new(bin)
        .args(["rate-sweep", "--pattern", "DD,ND,PN,NN", "--power-points", "1"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}
