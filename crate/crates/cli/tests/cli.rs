use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcc")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn decompose_exact_matrix_to_json() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "t.json", "[[3, 0], [0, 1]]");
    let o = lcc(&["decompose", "--matrix", &m, "--algorithm", "fs", "--s", "2", "--target-sqnr-db", "200"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["k"], 2);
    let verts = v["vertices"].as_array().unwrap();
    assert_eq!(verts.len(), 1);
    assert_eq!(verts[0]["id"], 3);
    assert_eq!(v["outputs"][0]["src"], 3);
}

#[test]
fn every_algorithm_runs_on_a_generated_matrix() {
    for alg in ["fs", "fp", "ma", "sliced", "csd"] {
        let o = lcc(&["decompose", "--algorithm", alg, "--rows", "8", "--cols", "4", "--target-sqnr-db", "15", "--slice-width", "2"]);
        assert_eq!(code(&o), 0, "{alg}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("\"outputs\""));
    }
}

#[test]
fn decompose_formats() {
    let dir = TempDir::new().unwrap();
    let dot = path(&dir, "g.dot");
    let o = lcc(&["decompose", "--rows", "6", "--cols", "3", "--target-sqnr-db", "10", "--format", "dot", "--out", &dot]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("class=\"input\"") && text.contains("class=\"output\""));
    assert!(text.contains("label=\"+2^") || text.contains("label=\"-2^"));
}

#[test]
fn missed_target_exits_three() {
    let o = lcc(&["decompose", "--algorithm", "fs", "--target-sqnr-db", "90", "--max-vertices", "8"]);
    assert_eq!(code(&o), 3);
    // the partial graph is still written
    assert!(stdout(&o).contains("\"vertices\""));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&lcc(&["decompose", "--bogus"])), 1);
    assert_eq!(code(&lcc(&["decompose", "--algorithm", "nope"])), 1);
    assert_eq!(code(&lcc(&["decompose", "--emin", "3", "--emax", "1"])), 1);
    assert_eq!(code(&lcc(&["decompose", "--s", "0"])), 1);
    assert_eq!(code(&lcc(&["frobnicate"])), 1);
    assert_eq!(code(&lcc(&["--help"])), 0);
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{\"k\": 2, \"vertices\": [{\"id\": 9, \"terms\": []}], \"outputs\": []}");
    let o = lcc(&["export", "--dag", &bad]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("vertices[0]"));
    let m = write(&dir, "m.txt", "1 2\n3\n");
    assert_eq!(code(&lcc(&["decompose", "--matrix", &m])), 2);
    assert_eq!(code(&lcc(&["eval", "--dag", &path(&dir, "missing.json")])), 2);
}

#[test]
fn export_and_eval_round_trip() {
    let dir = TempDir::new().unwrap();
    let g = path(&dir, "g.json");
    let m = write(&dir, "t.txt", "3 0\n0 1\n");
    let o = lcc(&["decompose", "--matrix", &m, "--algorithm", "fs", "--s", "2", "--target-sqnr-db", "200", "--out", &g]);
    assert_eq!(code(&o), 0);

    let o = lcc(&["export", "--dag", &g, "--format", "json"]);
    assert_eq!(stdout(&o), fs::read_to_string(&g).unwrap());

    let o = lcc(&["eval", "--dag", &g, "--matrix", &m, "--x", "2,5"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["y"], serde_json::json!([6.0, 5.0]));
    assert_eq!(v["n_add"], 1);
    assert_eq!(v["sqnr_db"], "inf");

    let o = lcc(&["eval", "--dag", &g, "--format", "csv"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(header.contains(&"n_delay") && header.contains(&"cost_total"));
    assert_eq!(lines.count(), 1);
}

#[test]
fn sweep_csv_is_deterministic() {
    let args = ["sweep", "--rows", "8", "--cols", "3", "--trials", "2", "--algorithm", "fs,ma", "--dmax", "0", "--target-sqnr-db", "10,20"];
    let a = lcc(&args);
    let b = lcc(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "algorithm,s,dmax,q,grid,trial,sqnr_db,n_add,n_delay,n_inv,cost_adders,cost_total,wall_ms,flag"
    );
    // 2 configs x 2 grid points x (2 trials + mean)
    assert_eq!(lines.count(), 12);
}

#[test]
fn sweep_from_spec_file() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "out.csv");
    let spec = format!(
        r#"{{"rows": 6, "cols": 3, "trials": 2, "seed": 4,
            "algorithms": [{{"algorithm": "fp", "target_sqnr_db": 0}}, {{"algorithm": "csd", "target_sqnr_db": 0}}],
            "grid": {{"target_sqnr": [8, 16]}}, "output": "{out}"}}"#
    );
    let s = write(&dir, "spec.json", &spec);
    let o = lcc(&["sweep", "--spec", &s]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(Path::new(&out)).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 3);
    let bad = write(&dir, "bad.json", r#"{"rows": 6}"#);
    assert_eq!(code(&lcc(&["sweep", "--spec", &bad])), 2);
}
