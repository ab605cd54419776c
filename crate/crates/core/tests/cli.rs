mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const TENT: &str = r#"{"default": 0, "pieces": [
  {"interval": [-1, 0], "coeffs": [0, 1]},
  {"interval": [0, 1], "coeffs": [1, -1]}
]}"#;

fn bmtk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bmtk")).args(args).env("BMTK_OUT", dir).output().unwrap()
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn tent_file(dir: &Path) -> String {
    let p = dir.join("tent.json");
    fs::write(&p, TENT).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn certify_smoothed_tent_passes() {
    let dir = tempfile::tempdir().unwrap();
    let omega = common::fixture_path("smooth_tent.json");
    let out = bmtk(dir.path(), &["certify", "--omega", omega.to_str().unwrap(), "--sigma", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("certify.json")).unwrap()).unwrap();
    assert_eq!(v["verdict"], "pass");
    assert!(!String::from_utf8_lossy(&out.stdout).trim().is_empty());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let src = tempfile::tempdir().unwrap();
    let f = tent_file(src.path());
    let omega = common::fixture_path("smooth_tent.json");
    let omega = omega.to_str().unwrap();
    let runs: [&[&str]; 4] = [
        &["hilbert", "--fn", &f, "--grid", "-3,3,101"],
        &["--format", "csv", "hilbert", "--fn", &f, "--x", "-2,0.5,4"],
        &["synthesize", "--omega", omega, "--sigma", "4", "--samples", "1024", "--format", "csv"],
        &["nazarov-local", "--fn", &f, "--lo", "-2", "--hi", "2", "--delta", "1", "--kappa", "1"],
    ];
    for args in runs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        assert_eq!(bmtk(a.path(), args).status.code(), Some(0), "{args:?}");
        assert_eq!(bmtk(b.path(), args).status.code(), Some(0), "{args:?}");
        let (fa, fb) = (files(a.path()), files(b.path()));
        assert!(!fa.is_empty(), "{args:?} wrote nothing");
        assert_eq!(fa.len(), fb.len());
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(x.file_name(), y.file_name());
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{args:?}: {:?} differs", x.file_name());
        }
    }
}

#[test]
fn out_flag_overrides_environment() {
    let (env_dir, flag_dir) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let f = tent_file(env_dir.path());
    let out = bmtk(env_dir.path(), &["poisson", "--fn", &f, "--out", flag_dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(flag_dir.path().join("poisson.json").exists());
    assert!(!env_dir.path().join("poisson.json").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let f = tent_file(dir.path());
    let omega = common::fixture_path("smooth_tent.json");
    let missing = dir.path().join("missing.json");
    assert_eq!(bmtk(dir.path(), &["hilbert", "--fn", missing.to_str().unwrap(), "--x", "0"]).status.code(), Some(2));
    assert_eq!(bmtk(dir.path(), &["certify", "--omega", omega.to_str().unwrap(), "--sigma", "-1"]).status.code(), Some(1));
    assert_eq!(bmtk(dir.path(), &["hilbert", "--fn", &f, "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(bmtk(dir.path(), &["hilbert", "--fn", &f, "--grid", "0,1"]).status.code(), Some(1));
    assert_eq!(bmtk(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn zoo_block_values_table() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--format", "csv", "zoo", "power-hills", "--gamma", "2", "--n-min", "3", "--n-max", "12", "--emit", "vr", "--r", "1"];
    assert_eq!(bmtk(dir.path(), &args).status.code(), Some(0));
    let table = files(dir.path()).into_iter().find(|p| p.extension().is_some_and(|e| e == "csv")).unwrap();
    let text = fs::read_to_string(table).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let (jc, vc) = (header.iter().position(|&h| h == "j").unwrap(), header.iter().position(|&h| h == "value").unwrap());
    let mut interior = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let j: i32 = cols[jc].parse().unwrap();
        if (3..12).contains(&j) {
            assert_eq!(cols[vc].parse::<f64>().unwrap(), 3.0, "{line}");
            interior += 1;
        }
    }
    assert_eq!(interior, 9);
}
