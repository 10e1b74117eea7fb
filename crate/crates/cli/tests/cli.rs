use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_quarteig"));
    c.env_remove("QUARTEIG_THREADS");
    c
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().expect("binary runs")
}

fn scalar_bundle(dir: &Path, v: [f64; 5]) {
    fs::create_dir_all(dir).unwrap();
    for (name, x) in ["A", "B", "C", "D", "E"].iter().zip(v) {
        let body = format!("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 {x}\n");
        fs::write(dir.join(format!("{name}.mtx")), body).unwrap();
    }
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn error_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("JSON error object on stderr")
}

#[test]
fn unit_quartic_defaults() {
    let t = tempfile::tempdir().unwrap();
    scalar_bundle(&t.path().join("unit"), [1.0, 0.0, 0.0, 0.0, -1.0]);
    let out = run(&["solve", "unit", "-o", "rep"], t.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&t.path().join("rep.json"));
    let pairs = r["eigenpairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 4);
    let mut roots: Vec<(i64, i64)> = pairs
        .iter()
        .map(|p| {
            assert_eq!(p["class"], "finite");
            assert!(p["eta_right"].as_f64().unwrap() <= 1e-14);
            let l = p["lambda"].as_array().unwrap();
            (l[0].as_f64().unwrap().round() as i64, l[1].as_f64().unwrap().round() as i64)
        })
        .collect();
    roots.sort();
    assert_eq!(roots, vec![(-1, 0), (0, -1), (0, 1), (1, 0)]);
    assert!(t.path().join("rep.csv").is_file());
}

#[test]
fn mirror_like_counts_and_pass_through_mode() {
    let t = tempfile::tempdir().unwrap();
    assert!(run(&["gen", "-o", "m", "mirror-like", "--seed", "2"], t.path()).status.success());
    assert!(run(&["solve", "m", "-o", "on", "--format", "json"], t.path()).status.success());
    let r = json(&t.path().join("on.json"));
    assert_eq!(r["deflation"]["zeros"], 9);
    assert_eq!(r["deflation"]["infinities"], 9);
    assert_eq!(r["summary"]["classes"]["finite"], 18);
    assert!(!t.path().join("on.csv").exists());

    assert!(run(&["solve", "m", "-o", "off", "--deflate", "off"], t.path()).status.success());
    let r = json(&t.path().join("off.json"));
    assert_eq!(r["config"]["deflate"], false);
    assert_eq!(r["deflation"]["zeros"], 0);
    assert_eq!(r["eigenpairs"].as_array().unwrap().len(), 36);
    let warns = r["warnings"].as_array().unwrap();
    assert!(warns.iter().any(|w| w.as_str().unwrap().contains("deflation disabled")));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let t = tempfile::tempdir().unwrap();
    assert!(run(&["gen", "-o", "p", "planted", "--n", "6", "--zero-cols-e", "2", "--seed", "3"], t.path()).status.success());
    assert!(run(&["solve", "p", "-o", "a", "--threads", "2"], t.path()).status.success());
    assert!(bin().args(["solve", "p", "-o", "b"]).env("QUARTEIG_THREADS", "1").current_dir(t.path()).output().unwrap().status.success());
    assert_eq!(fs::read(t.path().join("a.json")).unwrap(), fs::read(t.path().join("b.json")).unwrap());
    assert_eq!(fs::read(t.path().join("a.csv")).unwrap(), fs::read(t.path().join("b.csv")).unwrap());
}

#[test]
fn failures_have_distinct_codes() {
    let t = tempfile::tempdir().unwrap();
    let out = run(&["solve", "nowhere"], t.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_of(&out)["kind"], "missing_file");

    scalar_bundle(&t.path().join("bad"), [1.0, 0.0, 0.0, 0.0, -1.0]);
    fs::write(t.path().join("bad/C.mtx"), "not a matrix\n").unwrap();
    let out = run(&["solve", "bad"], t.path());
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_of(&out)["kind"], "malformed_matrix");

    scalar_bundle(&t.path().join("dim"), [1.0, 0.0, 0.0, 0.0, -1.0]);
    fs::write(t.path().join("dim/D.mtx"), "%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n").unwrap();
    let out = run(&["solve", "dim"], t.path());
    assert_eq!(out.status.code(), Some(5));

    scalar_bundle(&t.path().join("ok"), [1.0, 0.0, 0.0, 0.0, -1.0]);
    let out = run(&["solve", "ok", "--tol", "1.5"], t.path());
    assert_eq!(out.status.code(), Some(7));
    assert_eq!(error_of(&out)["kind"], "invalid_argument");
    let out = run(&["solve", "ok", "--threads", "0"], t.path());
    assert_eq!(out.status.code(), Some(7));

    let out = run(&["solve", "ok", "--scale", "maybe"], t.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["kind"], "usage");
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let head = lines.next().unwrap().split(',').map(str::to_string).collect();
    (head, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

#[test]
fn compare_needs_two_configs() {
    let t = tempfile::tempdir().unwrap();
    scalar_bundle(&t.path().join("u"), [1.0, 0.0, 0.0, 0.0, -1.0]);
    let out = run(&["compare", "u", "--config", "balance=off"], t.path());
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["compare", "u", "--config", "balance=off", "--config", "colour=red"], t.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_configs_give_identical_columns() {
    let t = tempfile::tempdir().unwrap();
    assert!(run(&["gen", "-o", "p", "planted", "--n", "4", "--zero-cols-a", "1"], t.path()).status.success());
    let out = run(&["compare", "p", "--config", "scale=on", "--config", "scale=on", "-o", "c"], t.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (head, rows) = csv_rows(&t.path().join("c-compare.csv"));
    assert_eq!(rows.len(), 16);
    let width = (head.len() - 1) / 2;
    for r in &rows {
        assert_eq!(r[1..1 + width], r[1 + width..]);
    }
}

#[test]
fn balanced_versus_unbalanced_on_graded_instance() {
    let t = tempfile::tempdir().unwrap();
    assert!(run(&["gen", "-o", "g", "graded", "--n", "12", "--seed", "1"], t.path()).status.success());
    let out = run(&["compare", "g", "--config", "balance=on", "--config", "balance=off", "-o", "cmp"], t.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (head, rows) = csv_rows(&t.path().join("cmp-compare.csv"));
    assert!(head.contains(&"omega_right_0".to_string()) && head.contains(&"omega_right_1".to_string()));
    assert_eq!(rows.len(), 48);
    let m = head.iter().position(|h| h == "modulus_0").unwrap();
    let moduli: Vec<f64> = rows.iter().map(|r| r[m].parse().unwrap()).collect();
    assert!(moduli.windows(2).all(|w| w[0] <= w[1]));
    for stem in ["cmp-cfg0.json", "cmp-cfg1.json"] {
        assert!(t.path().join(stem).is_file());
    }
}
