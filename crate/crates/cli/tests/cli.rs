use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use elastica::io::{load_shape, DistanceTable};
use elastica::curve::Topology;
use serde_json::Value;

fn elastica(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elastica"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn synth_writes_loadable_deterministic_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = elastica(dir.path(), &["synth", "circle", "--n", "256", "--out", "s"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join("s/circle.json");
    let (_, c) = load_shape(&path, Topology::Closed, false).unwrap();
    assert_eq!(c.len(), 256);
    assert!((c.length() - std::f64::consts::TAU).abs() < 1e-3);
    let again = elastica(dir.path(), &["synth", "circle", "--n", "256"]);
    assert_eq!(again.stdout, fs::read(&path).unwrap());
}

#[test]
fn identical_shapes_are_at_distance_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = elastica(
        dir.path(),
        &["dist", "synth:circle", "synth:circle", "--audit-symmetry", "--synth-n", "64", "--out", "t"],
    );
    assert_eq!(code(&o), 0);
    let table: DistanceTable = serde_json::from_str(&fs::read_to_string(dir.path().join("t/distances.json")).unwrap()).unwrap();
    assert_eq!(table.distances[0][1], Some(0.0));
    assert_eq!(table.distances[1][0], Some(0.0));
    assert_eq!(fs::read_to_string(dir.path().join("t/distances.csv")).unwrap(), "shape,circle,circle\ncircle,0,0\ncircle,0,0\n");
}

#[test]
fn audited_table_is_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let o = elastica(
        dir.path(),
        &["dist", "synth:ellipse", "synth:ellipse_fold", "--audit-symmetry", "--out", "t"],
    );
    assert_eq!(code(&o), 0);
    let table: DistanceTable = serde_json::from_str(&fs::read_to_string(dir.path().join("t/distances.json")).unwrap()).unwrap();
    assert!(table.audited);
    let (ab, ba) = (table.distances[0][1].unwrap(), table.distances[1][0].unwrap());
    assert!((ab - ba).abs() <= 1e-3 * ab, "{ab} {ba}");
    assert_eq!(table.distances[0][0], Some(0.0));
}

#[test]
fn open_mode_rejects_closed_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let o = elastica(dir.path(), &["dist", "synth:circle", "synth:ellipse", "--open"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("topology"));
}

#[test]
fn bad_inputs_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("tri.csv"), "0,0\n1,0\n0,1\n").unwrap();
    fs::write(dir.path().join("sq.csv"), "0,0\n1,0\n1,1\n0,1\n").unwrap();
    let o = elastica(dir.path(), &["dist", "tri.csv", "sq.csv"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 4 nodes"));
    fs::write(dir.path().join("bad.json"), "{\n  \"name\": \"x\",\n  \"topology\": 3\n}").unwrap();
    let o = elastica(dir.path(), &["dist", "bad.json", "sq.csv"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json:3:"));
    assert_eq!(code(&elastica(dir.path(), &["--tol-f", "0", "dist", "sq.csv", "sq.csv"])), 1);
    assert_eq!(code(&elastica(dir.path(), &["frobnicate"])), 1);
}

#[test]
fn geodesic_of_a_shape_to_itself_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let o = elastica(dir.path(), &["geodesic", "synth:star", "synth:star", "--synth-n", "64", "--out", "g"]);
    assert_eq!(code(&o), 0);
    let rec = json(&dir.path().join("g/geodesic.json"));
    assert_eq!(rec["method"], "rattle");
    assert_eq!(rec["distance"], 0.0);
    assert_eq!(rec["times"].as_array().unwrap().len(), 26);
    let svg = fs::read_to_string(dir.path().join("g/geodesic.svg")).unwrap();
    let shapes: Vec<&str> = svg.lines().filter(|l| l.starts_with("<polygon")).collect();
    assert_eq!(shapes.len(), 6);
    assert!(shapes.iter().all(|s| {
        // Same drawing up to the horizontal panel offset.
        let first: Vec<f64> = shapes[0].split(['"', ' ', ',']).filter_map(|x| x.parse().ok()).collect();
        let this: Vec<f64> = s.split(['"', ' ', ',']).filter_map(|x| x.parse().ok()).collect();
        first.len() == this.len() && first.iter().zip(&this).skip(1).step_by(2).all(|(a, b)| a == b)
    }));
}

#[test]
fn open_geodesics_use_the_flat_path_and_svg_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["geodesic", "synth:segment", "synth:arc", "--synth-n", "100", "--out", "g"];
    assert_eq!(code(&elastica(dir.path(), &args)), 0);
    let rec = json(&dir.path().join("g/geodesic.json"));
    assert_eq!(rec["method"], "flat");
    let first = fs::read(dir.path().join("g/geodesic.svg")).unwrap();
    assert_eq!(code(&elastica(dir.path(), &args)), 0);
    assert_eq!(first, fs::read(dir.path().join("g/geodesic.svg")).unwrap());
}

#[test]
fn refinement_contrast_on_the_fold() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["geodesic", "synth:ellipse", "synth:ellipse_fold", "--match"];
    let o = elastica(dir.path(), &[&base[..], &["--out", "r"]].concat());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = elastica(dir.path(), &[&base[..], &["--no-refine", "--out", "p"]].concat());
    assert_eq!(code(&o), 0);
    let refined = json(&dir.path().join("r/geodesic.json"));
    let plain = json(&dir.path().join("p/geodesic.json"));
    assert_eq!(refined["method"], "match");
    assert!(!refined["extra"]["refinement_log"].as_array().unwrap().is_empty());
    assert!(refined["extra"]["max_gap_over_h0"].as_f64().unwrap() <= 1.0 + 1e-9);
    assert!(plain["extra"]["max_gap_over_h0"].as_f64().unwrap() > 1.0);
}

#[test]
fn hitting_the_refinement_cap_exits_with_incompleteness() {
    let dir = tempfile::tempdir().unwrap();
    let o = elastica(
        dir.path(),
        &["match", "synth:ellipse", "synth:ellipse_fold", "--synth-n", "128", "--refine-cap", "1", "--out", "m"],
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&dir.path().join("m/match.json"));
    assert_eq!(m["incompleteness_detected"], true);
}

#[test]
fn quick_selftest_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = elastica(dir.path(), &["selftest", "--quick"]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["all_passed"], true);
    assert_eq!(report["quick"], true);
    assert!(String::from_utf8_lossy(&o.stderr).contains("criterion  1 PASS"));
}
