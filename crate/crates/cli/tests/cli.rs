use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn shiftlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiftlab")).current_dir(dir).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, v: &Value) {
    fs::write(dir.join(name), v.to_string()).unwrap();
}

fn read(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn block_construction_at_depth_six() {
    let d = TempDir::new().unwrap();
    let out = shiftlab(d.path(), &["construct", "s5", "--depth", "6", "--out", "s5.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let r = read(d.path(), "s5.json");
    assert_eq!(r["state"]["a"][0], 1);
    assert_eq!(r["state"]["b"][0], 4);
    assert_eq!(r["weight"]["generator"], "s5");
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["verdict"] == "holds_on_window"));
    let m = read(d.path(), "s5.json.manifest.json");
    assert_eq!(m, r["manifest"]);
    assert_eq!(m["params"]["depth"], 6);
}

#[test]
fn progression_return_set() {
    let d = TempDir::new().unwrap();
    write(d.path(), "ap3.json", &json!({"window": [-30000, 30000], "ap": {"b": 3, "offset": 0}}));
    let out = shiftlab(d.path(), &["diffset", "--set", "ap3.json", "--epsilon", "0.5", "--krange", "-30", "30", "--out", "r.json", "--csv", "r.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let r = read(d.path(), "r.json");
    let f: Vec<i64> = serde_json::from_value(r["F"].clone()).unwrap();
    assert_eq!(f, (-30..=30).step_by(3).collect::<Vec<_>>());
    assert_eq!(r["max_gap"], 3);
    assert_eq!(r["R"], json!([0, 1, -1]));
    assert_eq!(r["delta_k"].as_array().unwrap().len(), 61);
    let csv = fs::read_to_string(d.path().join("r.csv")).unwrap();
    assert!(csv.starts_with("index,value,series\n"));
    assert!(csv.lines().any(|l| l == "3,1.0,F"));
}

#[test]
fn overlapping_family_is_a_violation_with_witness() {
    let d = TempDir::new().unwrap();
    write(d.path(), "w.json", &json!({"generator": "constant:2", "domain": "bilateral", "window": [-400, 400]}));
    let e = json!({"window": [0, 200], "ap": {"b": 10, "offset": 0}});
    write(d.path(), "fam.json", &json!({"E": [e, e], "M": {"power_of_two": 1}}));
    let out = shiftlab(d.path(), &["verify", "--weights", "w.json", "--family", "fam.json", "--mode", "bilateral", "--out", "v.json"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("b: VIOLATED"), "{stdout}");
    assert!(stdout.contains("witness [1, 2, 0, 0]"), "{stdout}");
    assert_eq!(read(d.path(), "v.json")["overall"], "violated");
}

#[test]
fn interval_dataset_roundtrips_into_verify() {
    let d = TempDir::new().unwrap();
    let out = shiftlab(d.path(), &["construct", "s6", "--a", "60", "--epsilon", "0.01", "--pmax", "2", "--window", "1000000", "--out", "s6.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let r = read(d.path(), "s6.json");
    assert!((r["budget"].as_f64().unwrap() - 0.5782).abs() < 1e-4);
    write(d.path(), "w.json", &r["weight"]);
    let sets: Vec<Value> = r["sets"]["E"].as_array().unwrap().iter().map(|e| e["set"].clone()).collect();
    write(d.path(), "fam.json", &json!({"E": sets, "M": {"power_of_two": 1}, "rho": 2}));
    let out = shiftlab(d.path(), &["verify", "--weights", "w.json", "--family", "fam.json", "--mode", "bilateral"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["overall"], "holds_on_window");
}

#[test]
fn witnesses_for_flat_and_doubling_weights() {
    let d = TempDir::new().unwrap();
    write(d.path(), "a.json", &json!({"window": [0, 1000], "ap": {"b": 2, "offset": 0}}));
    write(d.path(), "w1.json", &json!({"generator": "constant:1", "domain": "unilateral", "window": [0, 2000]}));
    write(d.path(), "w2.json", &json!({"generator": "constant:2", "domain": "unilateral", "window": [0, 2000]}));
    let out = shiftlab(d.path(), &["witness", "--weights", "w1.json", "--set", "a.json", "--p", "1", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(1));
    let r = read(d.path(), "r.json");
    assert_eq!(r["reports"][0]["witnesses"][0]["indices"], json!([0, 4]));
    let out = shiftlab(d.path(), &["witness", "--weights", "w2.json", "--set", "a.json", "--p", "1", "--series", "30", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
}

#[test]
fn orbit_visits_and_distance_table() {
    let d = TempDir::new().unwrap();
    write(d.path(), "w.json", &json!({"generator": "constant:0.5", "domain": "unilateral", "window": [0, 200]}));
    write(d.path(), "x.json", &json!({"space": "sup", "entries": [[0, 1.0], [3, 8.0]]}));
    write(d.path(), "y.json", &json!({"space": "sup", "entries": [[0, 1.0]]}));
    let out = shiftlab(d.path(), &["orbit", "--weights", "w.json", "--vector", "x.json", "--target", "y.json", "--tol", "0.5", "--N", "10", "--csv", "o.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["visits"], json!([3]));
    assert_eq!(fs::read_to_string(d.path().join("o.csv")).unwrap().lines().count(), 12);
}

#[test]
fn identical_manifests_give_identical_reports() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let w = json!({"generator": "s6", "a": "60", "epsilon": "1/100", "pmax": 2, "window": [-100000, 100000]});
    let mut outputs = Vec::new();
    for (d, threads) in [(&a, "1"), (&b, "3")] {
        write(d.path(), "w.json", &w);
        let out = Command::new(env!("CARGO_BIN_EXE_shiftlab"))
            .current_dir(d.path())
            .env("SHIFTLAB_THREADS", threads)
            .args(["scan", "--weights", "w.json", "--random", "4", "--seed", "9", "--N", "20000", "--out", "s.json", "--csv", "s.csv"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
        outputs.push(["s.json", "s.json.manifest.json", "s.csv"].map(|f| fs::read(d.path().join(f)).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn input_and_usage_errors_exit_2() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("bad.json"), "{\"window\": [0, 10],\n \"members\": [1, 2,]}").unwrap();
    let out = shiftlab(d.path(), &["density", "--set", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("line 2 column"), "{}", text(&out.stderr));

    fs::write(d.path().join("unknown.json"), r#"{"window": [0, 10], "elements": [1]}"#).unwrap();
    assert_eq!(shiftlab(d.path(), &["density", "--set", "unknown.json"]).status.code(), Some(2));
    assert_eq!(shiftlab(d.path(), &["density", "--set", "absent.json"]).status.code(), Some(2));
    assert_eq!(shiftlab(d.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(shiftlab(d.path(), &["construct", "s5"]).status.code(), Some(2));

    write(d.path(), "a.json", &json!({"window": [-50, 50], "ap": {"b": 2, "offset": 0}}));
    assert_eq!(shiftlab(d.path(), &["diffset", "--set", "a.json", "--epsilon", "3/2"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_shiftlab"))
        .current_dir(d.path())
        .env("SHIFTLAB_THREADS", "many")
        .args(["density", "--set", "a.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn resource_limits_exit_1() {
    let d = TempDir::new().unwrap();
    let out = shiftlab(d.path(), &["construct", "s5", "--depth", "40"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("resource"), "{}", text(&out.stderr));
    // a vector whose support leaves a bilateral window
    write(d.path(), "w.json", &json!({"generator": "constant:2", "domain": "bilateral", "window": [-10, 10]}));
    write(d.path(), "x.json", &json!({"space": "sup", "entries": [[5, 1.0]]}));
    let out = shiftlab(d.path(), &["orbit", "--weights", "w.json", "--vector", "x.json", "--target", "x.json", "--tol", "0.1", "--N", "30"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_merges_verdicts() {
    let d = TempDir::new().unwrap();
    write(d.path(), "a.json", &json!({"window": [0, 1000], "ap": {"b": 2, "offset": 0}}));
    write(d.path(), "w1.json", &json!({"generator": "constant:1", "domain": "unilateral", "window": [0, 2000]}));
    write(d.path(), "w2.json", &json!({"generator": "constant:2", "domain": "unilateral", "window": [0, 2000]}));
    shiftlab(d.path(), &["witness", "--weights", "w1.json", "--set", "a.json", "--out", "bad.json"]);
    shiftlab(d.path(), &["witness", "--weights", "w2.json", "--set", "a.json", "--out", "good.json"]);
    let out = shiftlab(d.path(), &["report", "--in", "good.json", "--out", "all.json", "--csv", "all.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let out = shiftlab(d.path(), &["report", "--in", "good.json", "bad.json", "--out", "all.json"]);
    assert_eq!(out.status.code(), Some(1));
    let r = read(d.path(), "all.json");
    assert_eq!(r["conditions"].as_array().unwrap().len(), 2);
    assert_eq!(r["conditions"][1]["command"], "witness");
}
