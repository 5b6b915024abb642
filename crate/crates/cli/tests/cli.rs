use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn heightlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heightlab"))
        .args(args)
        .env_remove("HEIGHTLAB_CONFIG")
        .env_remove("HEIGHTLAB_FIXTURES_REGEN")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn validate(schema: &str, v: &Value) {
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(repo(schema)).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(v) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("schema violations: {msgs:?}\n{v}");
}

fn single(args: &[&str]) -> Value {
    let o = heightlab(args);
    assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    validate("schemas/cli_output.schema.json", &v);
    v
}

fn close(v: &Value, x: f64, tol: f64) {
    let got = v.as_f64().unwrap();
    assert!((got - x).abs() <= tol, "{got} vs {x}");
}

#[test]
fn height_of_two_under_squaring() {
    let v = single(&["height", "0,0,1", "2", "both"]);
    close(&v["local"]["value"], std::f64::consts::LN_2, 1e-12);
    close(&v["naive"]["value"], std::f64::consts::LN_2, 1e-9);
    assert!(v["agreement_defect"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["pass"], true);
}

#[test]
fn height_with_bad_prime() {
    // 4 ↦ 8 ↦ 32 ↦ 512: exponent of 2 is 2^n + 1, so ĥ = log 2.
    let v = single(&["height", "0,0,1/2", "4", "local"]);
    close(&v["local"]["value"], std::f64::consts::LN_2, 1e-9);
    assert!(v.get("naive").is_none());
    let places: Vec<&str> = v["places"].as_array().unwrap().iter().map(|p| p["place"].as_str().unwrap()).collect();
    assert_eq!(places, ["inf", "2"]);
}

#[test]
fn preperiodic_point_has_height_zero() {
    let v = single(&["height", "-1,0,1", "0", "both"]);
    assert_eq!(v["local"]["value"].as_f64(), Some(0.0));
    assert!(v["naive"]["value"].as_f64().unwrap().abs() < 1e-9);
    assert_eq!(v["pass"], true);
}

#[test]
fn green_at_each_kind_of_place() {
    let v = single(&["green", "0,0,1", "2", "inf"]);
    close(&v["value"]["value"], std::f64::consts::LN_2, 1e-9);
    assert_eq!(v["record"]["status"], "escaped");
    // v_2(1/4) = −2 and every step doubles it, so G_2 = 2·log 2.
    let v = single(&["green", "0,0,1", "1/4", "2"]);
    assert_eq!(v["exact"]["lo"], "2/1");
    assert_eq!(v["exact"]["hi"], "2/1");
    let v = single(&["green", "-1,0,1", "0", "inf"]);
    assert_eq!(v["value"]["value"].as_f64(), Some(0.0));
}

#[test]
fn normal_forms() {
    let v = single(&["normal-form", "0,0,2"]);
    assert_eq!(v["exact"]["normal_form"], "2; 0/1");
    assert_eq!(v["exact"]["map"]["scale"], "1/4");
    let v = single(&["normal-form", "0,0,1/2"]);
    assert_eq!(v["exact"]["normal_form"], "2; 0/1");
    assert_eq!(v["exact"]["map"]["scale"], "1/1");
    assert_eq!(v["exact"]["map"]["shift"], "0/1");
}

#[test]
fn bad_places_examples() {
    let list = |poly: &str| -> Vec<String> {
        let v = single(&["bad-places", poly]);
        v["bad_places"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
    };
    assert!(list("1,0,1").is_empty());
    assert_eq!(list("0,0,1/2"), ["2"]);
    assert_eq!(list("1/5,0,3"), ["3", "5"]);
}

#[test]
fn normal_form_flag_supplies_the_polynomial() {
    let a = single(&["--normal-form", "2;0", "bad-places"]);
    let b = single(&["bad-places", "0,0,1/2"]);
    assert_eq!(a, b);
    let v = single(&["--normal-form", "2;0", "height", "4", "local"]);
    close(&v["local"]["value"], std::f64::consts::LN_2, 1e-9);
}

#[test]
fn flags_after_negative_positionals() {
    let o = heightlab(&["height", "-1,0,1", "-1", "naive", "--format", "text"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("command = height\n"));
}

#[test]
fn usage_and_parse_errors_exit_2() {
    let o = heightlab(&["verify", "no-such-lemma"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown lemma id"));
    let o = heightlab(&["height", "0,0,x", "2"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("position 4"));
    assert_eq!(code(&heightlab(&["--precision", "113", "bad-places", "0,0,1"])), 2);
    assert_eq!(code(&heightlab(&["height", "0,0,1", "2", "fast"])), 2);
    assert_eq!(code(&heightlab(&["green", "0,0,1", "2", "4"])), 2);
    assert_eq!(code(&heightlab(&["frobnicate"])), 2);
}

#[test]
fn resource_caps_exit_3() {
    let o = heightlab(&["--degree-cap", "2", "bad-places", "0,0,0,1"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("resource cap"));
}

#[test]
fn verify_exit_code_tracks_the_report() {
    let spec = repo("specs/quick.toml");
    let spec = spec.to_str().unwrap();
    for (id, expect_pass) in [("transformation-rule", true), ("method-agreement", true)] {
        let o = heightlab(&["verify", id, spec]);
        let v = json(&o);
        validate("schemas/lemma_report.schema.json", &v);
        assert_eq!(v["pass"], expect_pass);
        assert_eq!(code(&o), if expect_pass { 0 } else { 1 });
    }
    // The finite-place clause fails at primes dividing 2d.
    let o = heightlab(&["verify", "eps-bounds", spec]);
    let v = json(&o);
    validate("schemas/lemma_report.schema.json", &v);
    assert_eq!(v["pass"], false);
    assert_eq!(code(&o), 1);
}

#[test]
fn verify_formats() {
    let spec = repo("specs/quick.toml");
    let spec = spec.to_str().unwrap();
    let o = heightlab(&["verify", "transformation-rule", spec, "--format", "csv"]);
    assert!(stdout(&o).starts_with("index,inputs,lhs,rhs,defect,status,note\n"));
    let o = heightlab(&["verify", "transformation-rule", spec, "--format", "text"]);
    assert!(stdout(&o).starts_with("transformation-rule: PASS"));
}

#[test]
fn output_is_byte_deterministic() {
    let spec = repo("specs/quick.toml");
    let spec = spec.to_str().unwrap();
    for args in [
        vec!["verify", "conjugation-invariance", spec],
        vec!["height", "1/5,0,3", "7/2", "both"],
        vec!["normal-form", "1,1,1,1"],
    ] {
        let a = heightlab(&args);
        let b = heightlab(&args);
        assert_eq!(code(&a), code(&b));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn seed_flag_changes_the_samples() {
    let spec = repo("specs/quick.toml");
    let spec = spec.to_str().unwrap();
    let a = json(&heightlab(&["verify", "transformation-rule", spec]));
    let b = json(&heightlab(&["verify", "transformation-rule", spec, "--seed", "7"]));
    assert_ne!(a["details"], b["details"]);
    assert_eq!(code(&heightlab(&["verify", "transformation-rule", spec, "--seed", "18446744073709551615"])), 2);
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "format = \"text\"\nnaive_steps = 12\n[caps]\narch = 40\n").unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["config"];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_heightlab")).args(&args).env("HEIGHTLAB_CONFIG", &cfg).output().unwrap()
    };
    let o = run(&[]);
    let text = stdout(&o);
    assert!(
        text.contains("format = \"text\"") && text.contains("naive_steps = 12") && text.contains("arch = 40"),
        "{text}"
    );
    let text = stdout(&run(&["--format", "csv", "--max-iter", "9"]));
    assert!(text.contains("format = \"csv\"") && text.contains("arch = 9") && text.contains("padic = 9"), "{text}");

    std::fs::write(&cfg, "colour = \"blue\"\n").unwrap();
    assert_eq!(code(&run(&[])), 2);
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    let o = heightlab(&["bad-places", "1/5,0,3", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "bad-places");
}

#[test]
fn experiment_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = repo("specs/quick.toml");
    let o = heightlab(&["experiment", "preimage", spec.to_str().unwrap(), dir.path().to_str().unwrap()]);
    let v = json(&o);
    validate("schemas/cli_output.schema.json", &v);
    assert_eq!(code(&o), if v["pass"] == true { 0 } else { 1 });
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("preimage-proximity.json")).unwrap()).unwrap();
    validate("schemas/lemma_report.schema.json", &report);
    assert_eq!(report["pass"], v["pass"]);
    assert!(std::fs::read_to_string(dir.path().join("preimage-proximity.csv")).unwrap().starts_with("index,"));
}

#[test]
fn shipped_specs_parse() {
    for name in ["default.json", "d2.json", "min_height_d2.toml", "quick.toml"] {
        let o = heightlab(&[
            "verify",
            "good-reduction",
            repo(&format!("specs/{name}")).to_str().unwrap(),
            "--format",
            "text",
        ]);
        assert!(code(&o) <= 1, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn schemas_reject_malformed_output() {
    let load = |name: &str| -> Value { serde_json::from_str(&std::fs::read_to_string(repo(name)).unwrap()).unwrap() };
    let cli = load("schemas/cli_output.schema.json");
    let cli = jsonschema::JSONSchema::compile(&cli).unwrap();
    let mut v = single(&["height", "0,0,1", "2", "local"]);
    assert!(cli.is_valid(&v));
    v["alpha"] = Value::from("two");
    assert!(!cli.is_valid(&v));
    let report = load("schemas/lemma_report.schema.json");
    let report = jsonschema::JSONSchema::compile(&report).unwrap();
    let mut r = json(&heightlab(&["verify", "transformation-rule", repo("specs/quick.toml").to_str().unwrap()]));
    assert!(report.is_valid(&r));
    r.as_object_mut().unwrap().remove("assertion");
    assert!(!report.is_valid(&r));
}
