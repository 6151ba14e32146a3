use std::path::PathBuf;
use std::process::{Command, Output};

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("instances").join(name)
}

fn pmllab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmllab")).args(args).output().unwrap()
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("pmllab-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn bound_sweep_prop1_column() {
    let inst = instance("noiseless.json");
    let dir = scratch("sweep");
    let csv = dir.join("sweep.csv");
    let out = pmllab(&["bound", "--instance", inst.to_str().unwrap(), "--sweep", "L=2,4,8", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&csv).unwrap();
    let head = rdr.headers().unwrap().clone();
    assert_eq!(&head[0], "setting");
    let col = head.iter().position(|h| h == "prop1").unwrap();
    let got: Vec<f64> = rdr.records().map(|r| r.unwrap()[col].parse().unwrap()).collect();
    for (g, w) in got.iter().zip([0.5, 2.0 / 3.0, 0.8]) {
        assert!((g - w).abs() < 1e-12, "{got:?}");
    }
    assert_eq!(got.len(), 3);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn csv_columns_are_stable() {
    let dir = scratch("cols");
    let csv = dir.join("out.csv");
    let inst = instance("channel.json");
    let out = pmllab(&["simulate", "--instance", inst.to_str().unwrap(), "--trials", "2000", "--timing", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let head: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let tail = &head[head.len() - 6..];
    assert_eq!(tail, ["empirical", "ci_lo", "ci_hi", "trials", "seed", "wall_ms"]);
    let params: Vec<&str> = head[1..].iter().take_while(|h| h.chars().next().unwrap().is_uppercase() || **h == "n").copied().collect();
    let mut sorted = params.clone();
    sorted.sort();
    assert_eq!(params, sorted);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn same_seed_same_bytes() {
    let dir = scratch("det");
    let inst = instance("gp.json");
    let run = |name: &str, workers: &str| {
        let p = dir.join(name);
        let out = pmllab(&[
            "simulate",
            "--instance",
            inst.to_str().unwrap(),
            "--trials",
            "5000",
            "--seed",
            "3",
            "--workers",
            workers,
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        std::fs::read(p).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "3");
    assert_eq!(a, b);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn report_directory_layout() {
    let dir = scratch("dir");
    let inst = instance("noiseless.json");
    let out = pmllab(&["bound", "--instance", inst.to_str().unwrap(), "--sweep", "L=2,4", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let mut names: Vec<String> =
        std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    assert_eq!(names.iter().filter(|n| n.ends_with(".json")).count(), 2);
    assert_eq!(names.iter().filter(|n| n.ends_with(".csv")).count(), 1);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn verify_lemma_canonical() {
    let inst = instance("canonical_lemma.json");
    let out = pmllab(&["verify-lemma", "--instance", inst.to_str().unwrap(), "--trials", "200000"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let v = if v.is_array() { v[0].clone() } else { v };
    let a = &v["atoms"][0];
    assert!((a["exact_mismatch"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!((a["lemma_bound"].as_f64().unwrap() - 0.6).abs() < 1e-12);
}

#[test]
fn invalid_instance_gives_error_json() {
    let dir = scratch("bad");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"setting": "channel", "model": {"p_x": {"weights": [0.5, 0.6]}, "channel": {"rows": [[1, 0], [0, 1]]}}, "params": {"L": 2}}"#).unwrap();
    let out = pmllab(&["bound", "--instance", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(v["error"]["kind"].is_string());
    let missing = pmllab(&["bound", "--instance", dir.join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    std::fs::remove_dir_all(dir).unwrap();
}
