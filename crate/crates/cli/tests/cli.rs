use std::path::PathBuf;
use std::process::{Command, Output};

fn ramlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ramlab"))
        .args(args)
        .env_remove("RAMLAB_GUARD_LIMIT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ramlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

fn json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn prim_rank_of_aabb() {
    let v = json(&ramlab(&["prim-rank", "aabb"]));
    assert_eq!(v["pi"], 2);
    assert_eq!(v["crit"].as_array().unwrap().len(), 1);
    assert_eq!(json(&ramlab(&["prim-rank", "ab"]))["pi"], "inf");
    assert_eq!(json(&ramlab(&["prim-rank", "1", "--k", "2"]))["pi"], 0);
}

#[test]
fn crit_lists_bases() {
    let v = json(&ramlab(&["crit", "aaa"]));
    assert_eq!(v["count"], 1);
    assert_eq!(v["crit"][0]["basis"][0], "a");
}

#[test]
fn verify_bound_matches_table() {
    let out = ramlab(&["verify-bound", "--d", "4"]);
    let text = stdout(&out);
    let v = json(&out);
    assert!((v["c"].as_f64().unwrap() - 1.075).abs() < 2e-3);
    assert!((v["bound"].as_f64().unwrap() - 3.723).abs() < 2e-3);
    assert!(text.contains("\"bound\":3.722419436408"));
    let g = json(&ramlab(&["verify-bound", "--rho", "2", "--rank", "3", "--c", "1.7320508075688772"]));
    assert!((g["bound"].as_f64().unwrap() - 2.0 * 3f64.sqrt()).abs() < 1e-9);
    assert_eq!(ramlab(&["verify-bound", "--rho", "2"]).status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(ramlab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ramlab(&["prim-rank", "a?b"]).status.code(), Some(1));
    assert_eq!(ramlab(&["--help"]).status.code(), Some(0));
    let guarded = Command::new(env!("CARGO_BIN_EXE_ramlab"))
        .args(["classify", "--k", "2", "--t", "6"])
        .env("RAMLAB_GUARD_LIMIT", "100")
        .output()
        .unwrap();
    assert_eq!(guarded.status.code(), Some(2));
    let phi = ramlab(&["moebius", "abc", "--n", "6"]);
    assert_eq!(phi.status.code(), Some(2));
}

#[test]
fn classify_csv() {
    let out = ramlab(&["classify", "--k", "2", "--t", "2", "--mode", "reduced"]);
    assert_eq!(stdout(&out), "t,m,count,crit_sum\n2,1,4,4\n2,inf,8,0\n");
    let raw = stdout(&ramlab(&["classify", "--k", "2", "--t", "4", "--no-crit"]));
    assert!(raw.lines().any(|l| l == "4,0,28,"));
    let theta = scratch("theta.json", r#"{"vertices":[0,1],"edges":[[0,1],[0,1],[0,1]]}"#);
    let v = json(&ramlab(&["classify", "--base", theta.to_str().unwrap(), "--t", "4", "--json"]));
    assert_eq!(v["range_violations"], 0);
}

#[test]
fn moebius_rationals() {
    let v = json(&ramlab(&["moebius", "aa", "--n", "3,4", "--r-support"]));
    let pairs = v["layers"][0]["pairs"].as_array().unwrap();
    let root_to_top = pairs.iter().find(|p| p["source"] == 0 && p["target"] == 1).unwrap();
    assert_eq!(root_to_top["phi"], "2/1");
    assert_eq!(root_to_top["two_sided"], "0/1");
    assert_eq!(v["r_support"]["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn sampling_and_spectra() {
    let a = stdout(&ramlab(&["sample", "--n", "20", "--d", "4", "--seed", "3"]));
    let b = stdout(&ramlab(&["sample", "--n", "20", "--d", "4", "--seed", "3"]));
    assert_eq!(a, b);
    let csv = stdout(&ramlab(&["sample", "--model", "matching", "--n", "10", "--d", "3", "--seed", "1", "--format", "csv"]));
    assert_eq!(csv.lines().count(), 16);
    let s = json(&ramlab(&["spectrum", "--n", "10", "--d", "4", "--seed", "5"]));
    assert_eq!(s["eigenvalues"].as_array().unwrap().len(), 10);
    assert_eq!(s["new_eigenvalues"].as_array().unwrap().len(), 9);
    let k4 = scratch("k4.json", r#"{"vertices":[0,1,2,3],"edges":[[0,1],[0,2],[0,3],[1,2],[1,3],[2,3]]}"#);
    let e = json(&ramlab(&["expansion", "--graph", k4.to_str().unwrap()]));
    assert_eq!(e["cheeger_h_exact"]["num"], 2);
    let sk = json(&ramlab(&["spectrum", "--graph", k4.to_str().unwrap()]));
    assert!((sk["lambda_nontrivial"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let rho = json(&ramlab(&["rho", "--bouquet", "2", "--depth", "100"]));
    assert!((rho["estimate"].as_f64().unwrap() - 2.0 * 3f64.sqrt()).abs() < 5e-3);
    assert_eq!(ramlab(&["sample", "--n", "5", "--d", "3", "--seed", "1"]).status.code(), Some(1));
}

#[test]
fn sweep_and_report() {
    let args = ["trial-sweep", "--model", "perm", "--n", "60", "--d", "4", "--trials", "5", "--seed", "7", "--deterministic"];
    let first = stdout(&ramlab(&args));
    assert_eq!(first, stdout(&ramlab(&args)));
    assert_eq!(first.lines().count(), 5);
    for (i, line) in first.lines().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["trial"], i as u64);
        assert!(v["lambda_A_new"].as_f64().unwrap() < 4.47);
    }
    let cover = stdout(&ramlab(&["trial-sweep", "--model", "cover", "--n", "30", "--d", "4", "--trials", "2", "--seed", "1"]));
    assert_eq!(cover.lines().count(), 2);
    let path = scratch("sweep.jsonl", &first);
    let report = stdout(&ramlab(&["report", path.to_str().unwrap(), "--threshold", "4.4641"]));
    let rows: Vec<&str> = report.lines().collect();
    assert_eq!(rows[0], "field,count,min,median,max,threshold,pass_rate");
    assert_eq!(rows.len(), 2);
    assert!(rows[1].ends_with(",1.000000000000"));
    let empty = scratch("empty.jsonl", "");
    let e = ramlab(&["report", empty.to_str().unwrap()]);
    assert_eq!(e.status.code(), Some(0));
    assert_eq!(stdout(&e).lines().count(), 1);
    let bad = scratch("bad.jsonl", "{\"lambda_A_new\": 1}\n{oops\n");
    let b = ramlab(&["report", bad.to_str().unwrap()]);
    assert_eq!(b.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&b.stderr).contains("line 2"));
}

#[test]
fn output_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("ramlab-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("bound.json");
    let o = ramlab(&["verify-bound", "--d", "6", "--output", p.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(p).unwrap().contains("\"d\":6"));
}
