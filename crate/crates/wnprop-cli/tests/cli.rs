use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wnprop"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn write_cfg(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn query(x: f64, t: f64) -> Value {
    json!({ "d": 1, "x0": [0.0], "x": [x], "t0": 0.0, "t": t })
}

#[test]
fn free_single_point_modulus() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "free.json", &json!({ "engine": "free", "query": query(0.7, 1.3) }));
    let out = dir.path().join("out");
    let (code, _) = run(&["propagate", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (header, rows) = csv(&out.join("propagator.csv"));
    assert_eq!(header, ["x", "t", "re", "im", "err"]);
    assert_eq!(rows.len(), 1);
    let modulus = rows[0][2].hypot(rows[0][3]);
    assert!((modulus - (2.0 * PI * 1.3).powf(-0.5)).abs() < 1e-15);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["engine"], "free");
}

#[test]
fn ks_without_potential_equals_free() {
    let dir = tempfile::tempdir().unwrap();
    let ends = json!([[0.7], [-0.2], [1.5]]);
    let free = write_cfg(dir.path(), "free.json", &json!({ "engine": "free", "query": query(0.7, 1.0), "endpoints": ends }));
    let ks = write_cfg(dir.path(), "ks.json", &json!({ "engine": "ks", "query": query(0.7, 1.0), "endpoints": ends, "measure": {} }));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&["propagate", "-c", free.to_str().unwrap(), "-o", a.to_str().unwrap()]).0, 0);
    assert_eq!(run(&["propagate", "-c", ks.to_str().unwrap(), "-o", b.to_str().unwrap()]).0, 0);
    let (_, fr) = csv(&a.join("propagator.csv"));
    let (kh, kr) = csv(&b.join("propagator.csv"));
    assert_eq!(kh, ["x", "t", "re", "im", "err", "tail_bound", "quad_error", "order"]);
    for (f, k) in fr.iter().zip(&kr) {
        assert_eq!(f[..5], k[..5]);
    }
}

#[test]
fn malformed_and_unknown_keys_exit_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"engine\": \"free\", ").unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["propagate", "-c", bad.to_str().unwrap(), "-o", out.to_str().unwrap()]).0, 2);
    assert!(!out.exists());
    let extra = write_cfg(dir.path(), "extra.json", &json!({ "engine": "free", "query": query(0.7, 1.0), "colour": "blue" }));
    assert_eq!(run(&["propagate", "-c", extra.to_str().unwrap(), "-o", out.to_str().unwrap()]).0, 2);
    let nested = write_cfg(dir.path(), "nested.json", &json!({ "engine": "free", "query": { "d": 1, "x0": [0.0], "x": [1.0], "t": 1.0, "dt": 0.1 } }));
    assert_eq!(run(&["propagate", "-c", nested.to_str().unwrap(), "-o", out.to_str().unwrap()]).0, 2);
    let engine = write_cfg(dir.path(), "engine.json", &json!({ "engine": "warp", "query": query(0.7, 1.0) }));
    assert_eq!(run(&["propagate", "-c", engine.to_str().unwrap(), "-o", out.to_str().unwrap()]).0, 2);
    assert!(!out.exists());
}

#[test]
fn harmonic_domain_violation_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let q = json!({ "d": 1, "x0": [0.0], "x": [0.5], "t0": 0.0, "t": 2.0, "k": 1.0 });
    let cfg = write_cfg(dir.path(), "h.json", &json!({ "engine": "harmonic", "query": q }));
    let out = dir.path().join("out");
    assert_eq!(run(&["propagate", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()]).0, 4);
    assert!(!out.exists());
}

#[test]
fn unreachable_tolerance_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let m = json!({ "fourier_atoms": [ { "alpha": [1.0], "w": [0.1, 0.0] }, { "alpha": [-1.0], "w": [0.1, 0.0] } ] });
    let cfg = write_cfg(dir.path(), "ahk.json", &json!({ "engine": "ahk", "query": query(0.5, 1.0), "measure": m, "tol": 1e-30, "order_cap": 2 }));
    let out = dir.path().join("out");
    assert_eq!(run(&["propagate", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()]).0, 3);
}

#[test]
fn ahk_and_circle_tables() {
    let dir = tempfile::tempdir().unwrap();
    let m = json!({ "fourier_atoms": [ { "alpha": [1.0], "w": [0.1, 0.0] }, { "alpha": [-1.0], "w": [0.1, 0.0] } ] });
    let cfg = write_cfg(dir.path(), "ahk.json", &json!({ "engine": "ahk", "query": query(0.5, 1.0), "measure": m, "order_cap": 4, "tol": 1e-4 }));
    let out = dir.path().join("ahk");
    assert_eq!(run(&["propagate", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()]).0, 0);
    let (_, rows) = csv(&out.join("propagator.csv"));
    assert!(rows[0][4] > 0.0 && rows[0][4] < 1e-4);
    let circ = write_cfg(dir.path(), "c.json", &json!({ "engine": "circle", "query": query(0.3, 0.5), "circle": { "coeffs": [[0, 1.0, 0.0]] } }));
    let out = dir.path().join("circ");
    assert_eq!(run(&["propagate", "-c", circ.to_str().unwrap(), "-o", out.to_str().unwrap()]).0, 0);
    let (_, rows) = csv(&out.join("propagator.csv"));
    assert_eq!(rows[0][2..4], [1.0, 0.0]);
}

fn doss_cfg(seed: Option<u64>) -> Value {
    let mut v = json!({
        "engine": "doss",
        "query": { "d": 1, "x0": [0.2], "x": [-0.3], "t0": 0.0, "t": 0.5 },
        "doss": { "potential": { "name": "harmonic", "k": 1.0 }, "domain": [[-1.0, 1.0]], "n_paths": 4000, "n_steps": 64 }
    });
    if let Some(s) = seed {
        v["seed"] = json!(s);
    }
    v
}

#[test]
fn doss_output_is_deterministic_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "d.json", &doss_cfg(Some(5)));
    let paths: Vec<PathBuf> = ["a", "b", "c", "d"].iter().map(|n| dir.path().join(n)).collect();
    let p = |i: usize| paths[i].to_str().unwrap().to_string();
    assert_eq!(run(&["propagate", "-c", cfg.to_str().unwrap(), "-o", &p(0)]).0, 0);
    let one = bin().env("WNPROP_THREADS", "1").args(["propagate", "-c", cfg.to_str().unwrap(), "-o", &p(1)]).status().unwrap();
    assert!(one.success());
    assert_eq!(run(&["--seed", "6", "propagate", "-c", cfg.to_str().unwrap(), "-o", &p(2)]).0, 0);
    let read = |i: usize| std::fs::read(paths[i].join("propagator.csv")).unwrap();
    assert_eq!(read(0), read(1));
    assert_eq!(std::fs::read(paths[0].join("report.json")).unwrap(), std::fs::read(paths[1].join("report.json")).unwrap());
    assert_ne!(read(0), read(2));
    let (h, _) = csv(&paths[0].join("propagator.csv"));
    assert_eq!(h, ["x", "t", "re", "im", "err", "bias", "mean_re", "mean_im", "k0_re", "k0_im"]);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(paths[0].join("report.json")).unwrap()).unwrap();
    for key in ["mean_re", "mean_im", "stderr", "k0_factor"] {
        assert!(!report["rows"][0]["estimate"][key].is_null(), "{key}");
    }
    let unseeded = write_cfg(dir.path(), "u.json", &doss_cfg(None));
    assert_eq!(run(&["propagate", "-c", unseeded.to_str().unwrap(), "-o", &p(3)]).0, 2);
    assert!(!paths[3].exists());
    let bad_threads = bin().env("WNPROP_THREADS", "many").args(["propagate", "-c", cfg.to_str().unwrap(), "-o", &p(3)]).status().unwrap();
    assert_eq!(bad_threads.code(), Some(2));
}

#[test]
fn verify_biorthogonality_passes_and_dumps_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "b.json", &json!({ "density": { "gaussian": { "mean": 0.0, "var": 1.0 } }, "n_max": 6 }));
    let out = dir.path().join("out");
    let (code, stdout) = run(&["verify", "-s", "biorthogonality", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 49);
    for ch in report["checks"].as_array().unwrap() {
        assert!(ch["residual"].as_f64().unwrap() < 1e-8);
    }
    let (h, rows) = csv(&out.join("biorthogonality.csv"));
    assert_eq!(h, ["n", "m", "value", "expected", "residual"]);
    assert_eq!(rows.len(), 49);
    let poisson = write_cfg(dir.path(), "p.json", &json!({ "density": { "poisson": { "lambda": 1.0 } } }));
    assert_eq!(run(&["verify", "-s", "biorthogonality", "-c", poisson.to_str().unwrap()]).0, 0);
}

#[test]
fn verify_ccr_free() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "c.json", &json!({ "query": query(0.4, 1.0), "s": 0.5 }));
    let (code, stdout) = run(&["verify", "-s", "ccr", "-c", cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert!(report["checks"][0]["residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(report["checks"][0]["tolerance"], 1e-8);
}

#[test]
fn verify_theta_and_schrodinger() {
    let dir = tempfile::tempdir().unwrap();
    let th = write_cfg(dir.path(), "t.json", &json!({ "eta": [1.0, 0.5], "a": [0.3, 0.1], "z": [0.9, 0.2], "theta_pair": [0.2, -0.1] }));
    assert_eq!(run(&["verify", "-s", "theta", "-c", th.to_str().unwrap()]).0, 0);
    let values: Vec<Value> = (0..33).map(|i| json!([0.5 * (i as f64 / 32.0), 0.0])).collect();
    let derivs: Vec<Value> = (0..33).map(|_| json!([0.5, 0.0])).collect();
    let sch = json!({ "kernel": "free", "x0": 0.1, "points": [[0.4, 0.7], [-0.3, 1.2]], "xi": { "grid": [0.0, 2.0], "values": values, "derivs": derivs } });
    let cfg = write_cfg(dir.path(), "s.json", &sch);
    assert_eq!(run(&["verify", "-s", "schrodinger", "-c", cfg.to_str().unwrap()]).0, 0);
    let mut strict = sch.clone();
    strict["tol"] = json!(1e-30);
    let cfg = write_cfg(dir.path(), "s2.json", &strict);
    let (code, stdout) = run(&["verify", "-s", "schrodinger", "-c", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(serde_json::from_str::<Value>(&stdout).unwrap()["passed"], false);
}

#[test]
fn verify_unknown_suite_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "c.json", &json!({}));
    assert_eq!(run(&["verify", "-s", "teleportation", "-c", cfg.to_str().unwrap()]).0, 2);
    let bad = write_cfg(dir.path(), "x.json", &json!({ "density": "quartic", "bogus": 1 }));
    assert_eq!(run(&["verify", "-s", "biorthogonality", "-c", bad.to_str().unwrap()]).0, 2);
}

fn entries(doc: &Value) -> BTreeMap<(u64, Vec<u64>), (f64, f64)> {
    let mut out = BTreeMap::new();
    for k in doc["kernels"].as_array().unwrap() {
        let deg = k["degree"].as_u64().unwrap();
        for e in k["entries"].as_array().unwrap() {
            let m = e["multi_index"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
            out.insert((deg, m), (e["re"].as_f64().unwrap(), e["im"].as_f64().unwrap()));
        }
    }
    out
}

fn kernels(dir: &Path, op: Value) -> Value {
    let out = dir.join("result.json");
    let cfg = write_cfg(dir, "k.json", &json!({ "operation": op, "output": "result.json" }));
    let (code, _) = run(&["kernels", "-c", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap()
}

#[test]
fn kernels_scale_identity_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = fixtures().join("vec_a.json");
    let input: Value = serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    let out = kernels(dir.path(), json!({ "scale": { "input": a.to_str().unwrap(), "z": [1.0, 0.0] } }));
    assert_eq!(entries(&out), entries(&input));
    let again = kernels(dir.path(), json!({ "scale": { "input": out, "z": [1.0, 0.0] } }));
    assert_eq!(again, out);
}

#[test]
fn kernels_donsker_has_no_odd_degrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = kernels(dir.path(), json!({ "donsker": { "basis": { "D": 2, "weights": [2.0, 3.0] }, "eta": [[1.0, 0.0], [0.0, 0.0]], "a": [0.0, 0.0], "n": 8 } }));
    let ks = out["kernels"].as_array().unwrap();
    assert_eq!(ks.len(), 9);
    for k in ks {
        let deg = k["degree"].as_u64().unwrap();
        assert_eq!(k["entries"].as_array().unwrap().is_empty(), deg % 2 == 1, "degree {deg}");
    }
}

#[test]
fn kernels_wick_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures();
    let out = kernels(dir.path(), json!({ "wick": { "input": f.join("vec_a.json").to_str().unwrap(), "other": f.join("vec_b.json").to_str().unwrap() } }));
    let golden: Value = serde_json::from_str(&std::fs::read_to_string(f.join("wick_golden.json")).unwrap()).unwrap();
    let (got, want) = (entries(&out), entries(&golden));
    assert_eq!(got.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>());
    for (k, (re, im)) in &want {
        let (gr, gi) = got[k];
        assert!((gr - re).abs() < 1e-12 && (gi - im).abs() < 1e-12, "{k:?}");
    }
}

#[test]
fn kernels_schema_violation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "k.json", &json!({ "operation": { "scale": { "input": "nope.json", "z": [1.0, 0.0], "extra": 1 } } }));
    assert_eq!(run(&["kernels", "-c", cfg.to_str().unwrap()]).0, 2);
    let bad_doc = json!({ "basis": { "D": 2, "weights": [2.0, 3.0] }, "kernels": [ { "degree": 1, "entries": [ { "multi_index": [1, 1], "re": 1.0, "im": 0.0 } ] } ] });
    let cfg = write_cfg(dir.path(), "k2.json", &json!({ "operation": { "scale": { "input": bad_doc, "z": [1.0, 0.0] } } }));
    assert_eq!(run(&["kernels", "-c", cfg.to_str().unwrap()]).0, 2);
}
