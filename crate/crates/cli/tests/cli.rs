use std::path::PathBuf;
use std::process::{Command, Output};

use aperiodic_diffraction::models::builtin;

fn apdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apdiff")).args(args).output().expect("run apdiff")
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn models_listing() {
    let o = apdiff(&["models"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for name in ["silver", "silver_twisted", "cap", "casper_scaffold"] {
        assert!(s.contains(name), "{s}");
    }
    assert!(s.contains("hat") && s.contains("ht") && s.contains("hex"));
    assert!(s.contains("displacement: none (load required)"));

    let j: serde_json::Value = serde_json::from_slice(&apdiff(&["models", "--json"]).stdout).unwrap();
    let names: Vec<&str> = j.as_array().unwrap().iter().map(|m| m["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["silver", "silver_twisted", "cap", "casper_scaffold"]);
}

#[test]
fn cap_peaks_are_byte_identical_across_runs() {
    let (a, b) = (tmp("peaks_a"), tmp("peaks_b"));
    for dir in [&a, &b] {
        let o = apdiff(&["peaks", "--model", "cap", "--out-dir", dir.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("brightest intensity 1.9453"), "{}", stdout(&o));
    }
    for ext in ["csv", "json", "svg"] {
        let f = format!("cap_peaks.{ext}");
        assert_eq!(std::fs::read(a.join(&f)).unwrap(), std::fs::read(b.join(&f)).unwrap(), "{f}");
    }
    let csv = std::fs::read_to_string(a.join("cap_peaks.csv")).unwrap();
    assert!(csv.starts_with("c1,c2,c3,c4,kx,ky,re_amp,im_amp,intensity,n_iters\n"));
}

#[test]
fn hat_run_reports_periods() {
    let dir = tmp("hat");
    let o = apdiff(&["peaks", "--model", "cap", "--deformation", "hat", "--out-dir", dir.to_str().unwrap()]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("dual coords [3, 1, 2, 1]") && s.contains("dual coords [1, 0, 3, 1]"), "{s}");
    assert!(dir.join("cap_hat_peaks.csv").exists());
}

#[test]
fn inexact_lengths_are_rejected() {
    let o = apdiff(&["peaks", "--model", "silver", "--deformation", "from-lengths:1.17157,1.17157"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exact"));
}

#[test]
fn exit_codes() {
    assert_eq!(apdiff(&["peaks", "--model", "nope"]).status.code(), Some(1));
    assert_eq!(apdiff(&["peaks", "--bogus-flag"]).status.code(), Some(1));
    assert_eq!(apdiff(&["--help"]).status.code(), Some(0));
    assert_eq!(apdiff(&["verify", "--model", "silver"]).status.code(), Some(0));
    let dir = tmp("scaffold");
    let o = apdiff(&["peaks", "--model", "casper_scaffold", "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(apdiff(&["window", "--model", "casper_scaffold"]).status.code(), Some(3));

    // Valid data for the wrong model: loads, but fails the closed-form oracle.
    let data = tmp("swap").join("twisted.json");
    builtin("silver_twisted").unwrap().displacement().unwrap().save(&data).unwrap();
    let o = apdiff(&["verify", "--model", "silver", "--data", data.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn scaffold_verify_skips_cocycle_checks() {
    let o = apdiff(&["verify", "--model", "casper_scaffold"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("SKIPPED") && s.contains("HT lattice constant"), "{s}");
}

#[test]
fn window_and_patch_outputs() {
    let dir = tmp("window");
    let svg = dir.join("w.svg");
    let o = apdiff(&["window", "--model", "silver", "--steps", "20", "--out", svg.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&svg).unwrap().matches("<rect").count(), 3);
    let o = apdiff(&["patch", "--model", "silver", "--steps", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 8);
}
