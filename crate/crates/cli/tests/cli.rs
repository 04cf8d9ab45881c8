use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn risfocus(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_risfocus")).args(args).current_dir(dir).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = risfocus(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn err(dir: &Path, args: &[&str]) -> String {
    let out = risfocus(dir, args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

fn gen(dir: &Path) {
    ok(dir, &["scenario", "gen", "--paper", "--seed", "7", "--nx", "7", "--nz", "7", "--delta-a-deg", "10", "--out", "s.json"]);
}

#[test]
fn scenario_has_sixteen_links() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path());
    let text = fs::read_to_string(d.path().join("s.json")).unwrap();
    assert_eq!(text.matches("\"from\"").count(), 16);
    assert!(text.contains("\"command\": \"risfocus scenario gen --paper --seed 7"));
}

#[test]
fn linear_codebook_has_three_codewords() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path());
    ok(d.path(), &["codebook", "build", "--scenario", "s.json", "--source", "1", "--method", "linear", "--out", "cb.json"]);
    let text = fs::read_to_string(d.path().join("cb.json")).unwrap();
    assert_eq!(text.matches("\"target\"").count(), 3);
    assert!(!text.contains("\"opt\""));
}

#[test]
fn evaluate_writes_csv_and_grid() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path());
    ok(d.path(), &["codebook", "build", "--scenario", "s.json", "--source", "1", "--method", "linear", "--out", "cb.json"]);
    let args = ["--scenario", "s.json", "--codebook", "cb.json", "--source", "1", "--focus", "3", "--out-dir", "o"];
    ok(d.path(), &[&["evaluate", "gains"][..], &args].concat());
    ok(d.path(), &[&["evaluate", "leakage", "--leak", "2"][..], &args].concat());
    let csv = fs::read_to_string(d.path().join("o/gains_s1_f3_linear.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "source,focus,leak_or_intended,l2,l1,value,method,seed");
    assert_eq!(rows.len(), 10);
    assert!(rows[1].starts_with("1,3,intended,1,1,1.0000000000"), "{}", rows[1]);
    let grid = fs::read_to_string(d.path().join("o/leakage_s1_f3_l2_linear.grid.txt")).unwrap();
    assert!(grid.contains("# rows=l2 cols=l1 source=1 focus=3 leak=2 method=linear\n"));
    assert!(!d.path().join("o/leakage_s1_f3_l4_linear.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path());
    let first = fs::read(d.path().join("s.json")).unwrap();
    gen(d.path());
    assert_eq!(first, fs::read(d.path().join("s.json")).unwrap());
}

#[test]
fn schema_errors_name_the_field() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path());
    let text = fs::read_to_string(d.path().join("s.json")).unwrap();
    fs::write(d.path().join("bad.json"), text.replacen("\"nx\": 7", "\"nx\": -7", 1)).unwrap();
    let msg = err(d.path(), &["codebook", "build", "--scenario", "bad.json", "--source", "1"]);
    assert!(msg.contains("ris[0].nx"), "{msg}");
    fs::write(d.path().join("bad.json"), text.replacen("\"delta_a_deg\"", "\"extra\": 1, \"delta_a_deg\"", 1)).unwrap();
    let msg = err(d.path(), &["codebook", "build", "--scenario", "bad.json", "--source", "1"]);
    assert!(msg.contains("extra"), "{msg}");
}

#[test]
fn bad_arguments_fail() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path());
    assert!(err(d.path(), &["codebook", "build", "--scenario", "s.json", "--source", "9"]).contains("9"));
    assert!(err(d.path(), &["codebook", "build", "--scenario", "s.json", "--source", "1", "--sdr-tol", "0"]).contains("sdr-tol"));
    assert!(err(d.path(), &["codebook", "build", "--scenario", "missing.json", "--source", "1"]).contains("missing.json"));
    err(d.path(), &["scenario", "gen", "--seed", "1"]);
    err(d.path(), &["aggregate", "--seeds", "5..2"]);
}

#[test]
fn aggregate_csv_rows() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["aggregate", "--seeds", "1,2", "--sizes", "2x2,3x3", "--delta-a-deg", "10", "--out", "a.csv"]);
    let csv = fs::read_to_string(d.path().join("a.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 1 + 4);
    assert!(rows[1].starts_with("linear,10,2,2,"), "{}", rows[1]);
    assert!(rows[2].starts_with("opt,10,2,2,"), "{}", rows[2]);
    assert!(rows[1].ends_with(",2"));
}
