use std::process::{Command, Output};

use serde_json::Value;

const NON_MORPHISM: &str =
    r#"{"m": 1, "M": 1, "d": 2, "forms": [[{"coeff": "1", "exps": [1, 1]}], [{"coeff": "1", "exps": [0, 2]}]]}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pullback-heights")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn check_power_map() {
    let v = json(&["check", "power:1,2"]);
    assert_eq!(v["is_morphism"], true);
    assert_eq!(v["bad_primes"], serde_json::json!([]));
    assert_eq!(v["config"]["command"]["subcommand"], "check");
    assert_eq!(v["config"]["global"]["seed"], 0x5EED);
}

#[test]
fn check_reports_non_morphism_without_failing() {
    let v = json(&["check", NON_MORPHISM]);
    assert_eq!(v["is_morphism"], false);
}

#[test]
fn density_table_at_two() {
    let v = json(&["density", "--prime", "2", "rat:(z^2-1)|(2z)"]);
    assert_eq!(v["delta"]["0"], "2/3");
    assert_eq!(v["delta"]["1"], "1/3");
}

#[test]
fn local_factor_strict_inequality() {
    let v = json(&["local-factor", "--prime", "3", "rat:3z^2+1|1"]);
    assert_eq!(v["c_local"]["exact"], "3/2");
    assert_eq!(v["mu"], "1");
    assert_eq!(v["mu_equals_c"], false);
}

#[test]
fn constant_of_z_squared_plus_one() {
    let v = json(&["constant", "rat:(z^2+1)|1"]);
    let c = v["constant"]["c_value"].as_f64().unwrap();
    assert!((c - 3.0 / std::f64::consts::PI).abs() < 1e-6, "{c}");
}

#[test]
fn count_emits_csv() {
    let out = run(&["count", "power:1,2", "--X", "4,100"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config: "));
    assert_eq!(lines[1], "X,count,predicted,ratio,flagged");
    assert!(lines[2].starts_with("4,8,"), "{}", lines[2]);
}

#[test]
fn malformed_json_exits_2() {
    let out = run(&["check", r#"{"m": 1"#]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_builder_exits_2() {
    assert_eq!(run(&["constant", "bogus"]).status.code(), Some(2));
}

#[test]
fn non_morphism_exits_3_with_witness() {
    let out = run(&["constant", NON_MORPHISM]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("witness:"), "{err}");
    assert!(err.contains("maximal minors"), "{err}");
}

#[test]
fn resource_cap_exits_4() {
    let out = run(&["--class-cap", "2", "density", "--prime", "2", "rat:(z^2-1)|(2z)"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn embedded_config_reruns_identically() {
    let dir = std::env::temp_dir().join(format!("pullback-heights-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for (name, args) in [
        ("c.json", vec!["--mc-samples", "20000", "arch-volume", "rat:(z^2-1)|(2z)"]),
        ("r.json", vec!["resultant", "rat:3z^2+1|1"]),
        ("n.csv", vec!["count", "identity:1", "--X", "10,20"]),
    ] {
        let first = run(&args);
        assert!(first.status.success());
        let path = dir.join(name);
        std::fs::write(&path, &first.stdout).unwrap();
        let again = run(&["--threads", "2", "--config", path.to_str().unwrap()]);
        assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
        assert_eq!(first.stdout, again.stdout, "{name}");
    }
    std::fs::remove_dir_all(&dir).ok();
}
