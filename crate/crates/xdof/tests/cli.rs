//! Integration tests for the command-line interface: flag handling, exit
//! codes, file formats, and determinism.

use std::process::{Command, Output};

fn xdof(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xdof")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const POINT: [&str; 10] =
    ["--M", "3", "--N", "2", "--pd", "0.7", "--pc", "0.5", "--pdc", "0.9"];

#[test]
fn bounds_prints_table_and_json() {
    let mut args = vec!["bounds"];
    args.extend_from_slice(&POINT);
    let out = xdof(&args);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("eta_ub          2.5"));
    assert!(text.contains("eta_lb          2.5"));
    args.push("--json");
    let out = xdof(&args);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["m"], 3);
    assert!((v["eta_ub"].as_f64().unwrap() - 2.5).abs() < 1e-12);
    assert!(v["per_scheme"]["ia"].as_f64().is_some());
}

#[test]
fn bounds_rejects_invalid_input_with_exit_2() {
    for args in [
        vec!["bounds", "--M", "0", "--N", "2", "--pd", "0.7", "--pc", "0.5", "--pdc", "0.9"],
        vec!["bounds", "--M", "3", "--N", "2", "--pd", "1.7", "--pc", "0.5", "--pdc", "0.9"],
        vec!["bounds", "--M", "3", "--N", "2"], // missing probabilities
        vec!["bounds", "--M", "x", "--N", "2", "--pd", "0.7", "--pc", "0.5", "--pdc", "0.9"],
        vec!["nonsense"],
    ] {
        let out = xdof(&args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn config_file_supplies_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"M":3,"N":2,"p_d":0.7,"p_c":0.5,"p_d_given_c":0.9}"#).unwrap();
    let out = xdof(&["bounds", "--config", cfg.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["m"], 3);
    // explicit flag overrides the config entry
    let out = xdof(&["bounds", "--config", cfg.to_str().unwrap(), "--M", "4", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["m"], 4);
    // malformed config is a usage error
    std::fs::write(&cfg, "{oops").unwrap();
    let out = xdof(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn curve_emits_exact_header_and_sorted_grid() {
    let out = xdof(&["curve", "--pd", "0.7", "--pc", "0.3", "--pdc", "0.5", "--cap", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,eta_ub,eta_lb,eta_ia,eta_hkia,regime,tight");
    let xs: Vec<f64> =
        lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(xs.len(), 6);
    assert!(xs.windows(2).all(|w| w[0] < w[1]), "grid not strictly increasing: {xs:?}");
}

#[test]
fn curve_probability_axis_and_errors() {
    let out = xdof(&[
        "curve", "--axis", "p-c", "--M", "3", "--N", "2", "--pd", "0.7", "--pc", "0.5",
        "--pdc", "0.9", "--points", "5", "--start", "0.1", "--stop", "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().nth(1).unwrap().starts_with("0.1,"));
    assert!(text.lines().last().unwrap().starts_with("0.5,"));
    // empty grid
    let out = xdof(&[
        "curve", "--pd", "0.7", "--pc", "0.3", "--pdc", "0.5", "--start", "0.301",
        "--stop", "0.302",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // unwritable output path
    let out = xdof(&[
        "curve", "--pd", "0.7", "--pc", "0.3", "--pdc", "0.5", "--out",
        "/nonexistent_dir/c.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_reports_and_exit_codes() {
    let out = xdof(&["verify", "--suite", "crossrank", "--trials", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("result: PASS"));
    let out = xdof(&["verify", "--suite", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    // JSON report file
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("report.json");
    let out = xdof(&["verify", "--suite", "crossrank", "--trials", "4", "--out",
        rep.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(v["suite"], "crossrank");
    assert!(v["records"].as_array().unwrap().len() >= 2);
}

#[test]
fn scheme_dump_check_and_errors() {
    let out = xdof(&["scheme", "--family", "type1_r1", "--M", "2", "--N", "3", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["family"], "type1_r1");
    assert_eq!(v["dims"].as_array().unwrap().len(), 4);
    let f = &v["filters"]["psi1"];
    let rows = f["rows"].as_u64().unwrap() as usize;
    let cols = f["cols"].as_u64().unwrap() as usize;
    assert_eq!(f["data"].as_array().unwrap().len(), rows * cols);
    // condition check table
    let out = xdof(&["scheme", "--family", "type1_r1", "--M", "2", "--N", "3", "--check"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("true"));
    // illegal dimensions and unknown family
    let out = xdof(&["scheme", "--family", "type1_r1", "--M", "5", "--N", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = xdof(&["scheme", "--family", "bogus", "--M", "2", "--N", "3"]);
    assert_eq!(out.status.code(), Some(2));
    // exponent out of range
    let out = xdof(&["scheme", "--family", "hkia_lb_t1", "--M", "5", "--N", "6", "--a", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plot_validates_input() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("out.svg");
    let bad = dir.path().join("bad.csv");
    // missing input file
    let out = xdof(&["plot", "--in", dir.path().join("none.csv").to_str().unwrap(), "--out",
        svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // wrong header
    std::fs::write(&bad, "a,b\n1,2\n").unwrap();
    let out = xdof(&["plot", "--in", bad.to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // malformed row
    std::fs::write(
        &bad,
        "x,eta_ub,eta_lb,eta_ia,eta_hkia,regime,tight\n0.5,oops,1,1,1,1,true\n",
    )
    .unwrap();
    let out = xdof(&["plot", "--in", bad.to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // single-row CSV renders point markers
    std::fs::write(
        &bad,
        "x,eta_ub,eta_lb,eta_ia,eta_hkia,regime,tight\n0.5,1,0.9,0.8,0.9,1,true\n",
    )
    .unwrap();
    let out = xdof(&["plot", "--in", bad.to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.contains("<circle"));
    assert!(!text.contains("<polyline"));
}

#[test]
fn curve_values_use_twelve_significant_digits() {
    let out = xdof(&[
        "curve", "--axis", "p-c", "--M", "3", "--N", "2", "--pd", "0.7", "--pc", "0.5",
        "--pdc", "0.9", "--points", "3", "--start", "0.0", "--stop", "0.1",
    ]);
    let text = stdout(&out);
    // x = 1/30-style values print with 12 significant digits
    assert!(text.contains("0.05,"), "{text}");
    for line in text.lines().skip(1) {
        for field in line.split(',').take(5) {
            assert!(!field.contains('e'), "scientific notation in CSV: {field}");
            assert!(!field.contains(' '));
        }
    }
}
