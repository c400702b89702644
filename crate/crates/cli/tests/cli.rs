use std::path::PathBuf;
use std::process::{Command, Output};

use choi_sqpt::{ChiMatrix, QuantumChannel};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_choi-sqpt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("CHOI_SQPT_SEED").output().expect("binary runs")
}

fn run_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("choi-sqpt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn chi_from_report(v: &Value) -> ChiMatrix {
    ChiMatrix::from_json(&v["results"]["chi"].to_string()).unwrap()
}

fn without_duration(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("duration_ms");
    v
}

#[test]
fn bit_flip_element_single_setting() {
    let v = run_json(&["element", "--preset", "bit-flip", "--param", "0.25", "--target", "0,1,0,1"]);
    let value = &v["results"]["value"];
    assert!((value[0].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!(value[1].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["results"]["std_error"].as_f64(), Some(0.0));
    assert_eq!(v["settings"]["plan"].as_u64(), Some(1));
}

#[test]
fn identity_coherence_uses_sixteen_settings() {
    let v = run_json(&["element", "--preset", "identity", "--target", "0,0,1,1"]);
    assert!((v["results"]["value"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["settings"]["plan"].as_u64(), Some(16));
}

#[test]
fn lambda_target_maps_to_chi() {
    // λ_{ab;cd} = χ_{ca;db}
    let v = run_json(&["element", "--preset", "identity", "--target", "0,1,0,1", "--lambda"]);
    assert_eq!(v["results"]["target"], serde_json::json!([0, 0, 1, 1]));
    assert_eq!(v["results"]["lambda_target"], serde_json::json!([0, 1, 0, 1]));
}

#[test]
fn sampled_element_is_reproducible() {
    let args = [
        "element", "--preset", "depolarizing", "--param", "0.2", "--target", "0,0,1,1", "--backend", "sampled",
        "--shots", "5000", "--seed", "11",
    ];
    let a = without_duration(run_json(&args));
    let b = without_duration(run_json(&args));
    assert_eq!(a, b);
    assert!(a["results"]["std_error"].as_f64().unwrap() > 0.0);

    let mut other = args.to_vec();
    let last = other.len() - 1;
    other[last] = "12";
    let c = without_duration(run_json(&other));
    assert_ne!(a["results"]["value"], c["results"]["value"]);
}

#[test]
fn seed_from_environment() {
    let args = ["element", "--preset", "bit-flip", "--param", "0.3", "--target", "0,1,0,1", "--backend", "sampled"];
    let with_env = bin().args(args).env("CHOI_SQPT_SEED", "5").output().unwrap();
    let with_flag = run(&[&args[..], &["--seed", "5"]].concat());
    let a: Value = serde_json::from_slice(&with_env.stdout).unwrap();
    let b: Value = serde_json::from_slice(&with_flag.stdout).unwrap();
    assert_eq!(a["results"], b["results"]);
}

#[test]
fn full_random_channel_matches_oracle() {
    let v = run_json(&["full", "--preset", "random-cptp", "--param", "7", "--dim", "4"]);
    assert!(v["results"]["oracle_max_abs_error"].as_f64().unwrap() < 1e-10);
    let chi = chi_from_report(&v);
    let oracle = QuantumChannel::preset("random-cptp", &[7.0], 4).unwrap().chi_oracle();
    assert!(chi.max_abs_diff(&oracle) < 1e-10);
    assert_eq!(v["settings"]["distinct"].as_u64(), Some(256));
}

#[test]
fn full_product_hermitian_two_qubits() {
    let v = run_json(&[
        "full", "--preset", "depolarizing", "--param", "0.1", "--dim", "4", "--strategy", "product-hermitian",
        "--local-dim", "2",
    ]);
    assert!(v["results"]["oracle_max_abs_error"].as_f64().unwrap() < 1e-10);
}

#[test]
fn product_hermitian_rejects_non_power_dimension() {
    let out = run(&["full", "--preset", "identity", "--dim", "6", "--strategy", "product-hermitian", "--local-dim", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identity_full_chi_matches_golden() {
    let golden_text = include_str!("golden/identity_d2_chi.json");
    let golden = ChiMatrix::from_json(golden_text).unwrap();
    let oracle = QuantumChannel::identity(2).chi_oracle();
    assert!(golden.max_abs_diff(&oracle) < 1e-15, "golden drifted from the library oracle");

    let v = run_json(&["full", "--preset", "identity", "--dim", "2"]);
    assert!(chi_from_report(&v).max_abs_diff(&golden) < 1e-12);
}

#[test]
fn tp_shortcut_on_lossy_channel_exits_4() {
    let path = tmp("lossy.json");
    let k = r#"{"dim":2,"kraus":[[[[0.9,0.0],[0.0,0.0]],[[0.0,0.0],[0.8,0.0]]]]}"#;
    std::fs::write(&path, k).unwrap();
    let p = path.to_str().unwrap();

    let out = run(&["full", "--channel", p, "--tp-shortcut"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    // the same channel is fine without the shortcut
    let v = run_json(&["full", "--channel", p]);
    assert!(v["results"]["oracle_max_abs_error"].as_f64().unwrap() < 1e-10);

    let out = run(&["validate", "--channel", p]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn tp_shortcut_counts() {
    let v = run_json(&["full", "--preset", "amplitude-damping", "--param", "0.3", "--tp-shortcut"]);
    assert_eq!(v["settings"]["measured"].as_u64(), Some(12));
    assert_eq!(v["settings"]["inferred"].as_u64(), Some(4));
    assert!(v["results"]["oracle_max_abs_error"].as_f64().unwrap() < 1e-10);
}

#[test]
fn validate_passes_presets() {
    for args in [
        vec!["validate", "--preset", "identity", "--dim", "3"],
        vec!["validate", "--preset", "phase-flip", "--param", "0.4"],
        vec!["validate", "--preset", "random-cptp", "--param", "3", "--dim", "3"],
    ] {
        let v = run_json(&args);
        assert_eq!(v["results"]["trace_preserving"], Value::Bool(true));
        assert_eq!(v["results"]["completely_positive"], Value::Bool(true));
    }
}

#[test]
fn plan_setting_counts() {
    for (target, dim, count) in [("0,0,0,0", "2", 1), ("0,1,0,0", "2", 4), ("0,0,1,1", "2", 16), ("0,2,1,2", "3", 4), ("0,1,2,0", "3", 16)] {
        let v = run_json(&["plan", "--dim", dim, "--target", target]);
        assert_eq!(v["settings"]["plan"].as_u64(), Some(count), "target {target}");
        assert_eq!(v["results"]["settings"].as_array().unwrap().len(), count as usize);
    }
}

#[test]
fn plan_rejects_out_of_range_target() {
    assert_eq!(run(&["plan", "--dim", "2", "--target", "0,0,2,0"]).status.code(), Some(2));
    assert_eq!(run(&["plan", "--target", "0,0,1"]).status.code(), Some(2));
}

#[test]
fn convert_round_trip() {
    let v = run_json(&["convert", "--preset", "random-cptp", "--param", "2", "--dim", "4"]);
    assert_eq!(v["results"]["to"], "pauli-row-major");
    assert!(v["results"]["round_trip_error"].as_f64().unwrap() < 1e-12);

    let path = tmp("pauli.json");
    std::fs::write(&path, v["results"]["chi"].to_string()).unwrap();
    let back = run_json(&["convert", "--chi", path.to_str().unwrap(), "--to", "choi"]);
    let oracle = QuantumChannel::preset("random-cptp", &[2.0], 4).unwrap().chi_oracle();
    assert!(chi_from_report(&back).max_abs_diff(&oracle) < 1e-12);
}

#[test]
fn convert_rejects_qutrit() {
    assert_eq!(run(&["convert", "--preset", "identity", "--dim", "3"]).status.code(), Some(2));
}

#[test]
fn reports_identical_apart_from_duration() {
    let args = ["full", "--preset", "depolarizing", "--param", "0.3", "--backend", "sampled", "--shots", "2000"];
    let a = run(&args).stdout;
    let b = run(&args).stdout;
    let strip = |s: &[u8]| {
        String::from_utf8_lossy(s)
            .lines()
            .filter(|l| !l.contains("\"duration_ms\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn output_file_holds_the_report() {
    let path = tmp("report.json");
    let out = run(&["element", "--preset", "identity", "--target", "0,0,0,0", "--pretty", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("χ[00;00]"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "element");
}

#[test]
fn export_round_trips_through_channel_file() {
    let path = tmp("exported.json");
    let out = run(&["export", "--preset", "depolarizing", "--param", "0.2", "--dim", "3", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    let ch = QuantumChannel::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let reference = QuantumChannel::preset("depolarizing", &[0.2], 3).unwrap();
    assert!(ch.chi_oracle().max_abs_diff(&reference.chi_oracle()) < 1e-15);
}

#[test]
fn malformed_channel_file_exits_3() {
    let path = tmp("bad.json");
    std::fs::write(&path, "{\"dim\": 2, \"kraus\": [[[1, 0]]]").unwrap();
    assert_eq!(run(&["validate", "--channel", path.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(run(&["validate", "--channel", "/nonexistent/ch.json"]).status.code(), Some(3));
}

#[test]
fn channel_and_preset_conflict() {
    assert_eq!(run(&["validate", "--preset", "identity", "--channel", "x.json"]).status.code(), Some(2));
    assert_eq!(run(&["validate"]).status.code(), Some(2));
}
