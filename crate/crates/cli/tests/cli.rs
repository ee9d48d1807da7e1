use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hdw_core::io::read_dump;
use serde_json::Value;
use tempfile::TempDir;

fn hdw(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hdw"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("HDW_THREADS", t),
        None => cmd.env_remove("HDW_THREADS"),
    };
    cmd.output().expect("spawn hdw")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn evolve_1d_conserves_norm() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let o = hdw(
        &["evolve", "--eq", "dirac", "--n", "1", "--N", "1024", "--L", "40", "--bump", "a=0.5", "--t", "3",
          "--engine", "spectral", "--out", path_str(&out)],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("summary.json"));
    let drift = s["steps"][0]["norm_drift"].as_f64().unwrap();
    assert!(drift < 1e-11, "{drift}");
    assert!(out.join("psi_000.hdw").exists());
    assert!(out.join("timing.log").exists());
    assert!(!fs::read_to_string(out.join("summary.json")).unwrap().contains("time"));
}

#[test]
fn time_zero_reproduces_initial_dump() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let o = hdw(&["evolve", "--n", "2", "--N", "64", "--L", "8", "--bump", "a=1,comp=1", "--t", "0", "--out", path_str(&out)], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let a = read_dump(fs::File::open(out.join("initial.hdw")).unwrap()).unwrap();
    let b = read_dump(fs::File::open(out.join("psi_000.hdw")).unwrap()).unwrap();
    assert_eq!(a.grid, b.grid);
    for (ca, cb) in a.components.iter().zip(&b.components) {
        for (x, y) in ca.iter().zip(cb) {
            assert!((x - y).norm() <= 1e-12);
        }
    }
}

#[test]
fn closed_form_probes_match_spectral_in_2d() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let o = hdw(&["evolve", "--n", "2", "--engine", "closedform", "--t", "2", "--no-dumps", "--out", path_str(&out)], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("summary.json"));
    let d = s["steps"][0]["probe_max_rel_diff"].as_f64().unwrap();
    assert!(d < 1e-2, "{d}");
    let csv = fs::read_to_string(out.join("probes_000.csv")).unwrap();
    assert_eq!(csv.lines().count(), 201);
}

#[test]
fn huygens_classifications() {
    let tmp = TempDir::new().unwrap();
    for (n, eq, expected) in [("3", "dirac", "huygens"), ("2", "dirac", "non_huygens"), ("1", "kg", "non_huygens")] {
        let out = tmp.path().join(format!("{n}{eq}"));
        let o = hdw(&["huygens", "--eq", eq, "--n", n, "--no-dumps", "--out", path_str(&out)], None);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let r = json(&out.join("huygens.json"));
        assert_eq!(r["reports"][0]["classification"], expected, "n = {n} {eq}");
        assert!(out.join("profile_000.csv").exists());
    }
}

#[test]
fn zeta_limits_match_green_function() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("z");
    let o = hdw(&["zeta", "--n", "2", "--t", "2", "--r", "1,3", "--out", path_str(&out)], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let limits = fs::read_to_string(out.join("zeta_limits.csv")).unwrap();
    let rows: Vec<Vec<&str>> = limits.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let exact = -1.0 / (2.0 * std::f64::consts::PI * 3f64.sqrt());
    let im: f64 = rows[0][4].parse().unwrap();
    assert!((im - exact).abs() < 1e-4 * exact.abs());
    let far: f64 = rows[1][4].parse::<f64>().unwrap().abs() + rows[1][3].parse::<f64>().unwrap().abs();
    assert!(far < 1e-4);
    let scan = fs::read_to_string(out.join("zeta_scan.csv")).unwrap();
    assert!(scan.starts_with("n,t,r,eps,re,im,est_error"));
    assert_eq!(scan.lines().count(), 1 + 2 * 5);
}

#[test]
fn outputs_are_deterministic_across_runs_and_threads() {
    let tmp = TempDir::new().unwrap();
    let run = |dir: &str, threads: &str| {
        let out = tmp.path().join(dir);
        let o = hdw(&["huygens", "--n", "2", "--t", "2,3", "--out", path_str(&out)], Some(threads));
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a", "1");
    let b = run("b", "4");
    for f in ["huygens.json", "profile_000.csv", "profile_001.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn resolved_config_reproduces_outputs() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let args = ["evolve", "--n", "1", "--eq", "kg", "--bump", "a=0.7,field=f,center=0.5", "--t", "1,2.5", "--out", path_str(&out)];
    assert_eq!(code(&hdw(&args, None)), 0);
    let files = ["summary.json", "phi_000.hdw", "phi_001.hdw", "resolved.toml"];
    let first: Vec<Vec<u8>> = files.iter().map(|f| fs::read(out.join(f)).unwrap()).collect();
    let cfg = tmp.path().join("resolved.toml");
    fs::copy(out.join("resolved.toml"), &cfg).unwrap();
    fs::remove_dir_all(&out).unwrap();
    let o = hdw(&["evolve", "--config", path_str(&cfg)], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for (f, bytes) in files.iter().zip(&first) {
        assert_eq!(&fs::read(out.join(f)).unwrap(), bytes, "{f}");
    }
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let p = |s: &str| tmp.path().join(s);

    let bad = p("bad.toml");
    fs::write(&bad, "[grid]\nL = 10.0\nNN = 64\n").unwrap();
    assert_eq!(code(&hdw(&["evolve", "--config", path_str(&bad), "--out", path_str(&p("o1"))], None)), 2);
    assert_eq!(code(&hdw(&["evolve", "--bump", "q=1", "--out", path_str(&p("o2"))], None)), 2);
    assert_eq!(code(&hdw(&["evolve", "--n", "1", "--N", "100", "--out", path_str(&p("o3"))], None)), 2);
    assert_eq!(code(&hdw(&["huygens", "--n", "1", "--t", "9.8", "--out", path_str(&p("o4"))], None)), 2);
    assert_eq!(code(&hdw(&["zeta", "--n", "1", "--out", path_str(&p("o5"))], None)), 2);
    assert_eq!(code(&hdw(&["evolve", "--frobnicate"], None)), 2);
    assert_eq!(code(&hdw(&["evolve", "--n", "1", "--out", path_str(&p("o6"))], Some("zero"))), 2);

    // A coarse 2D grid leaks mass past the light cone through the unresolved bump.
    let o = hdw(&["huygens", "--n", "2", "--N", "32", "--L", "10", "--w", "0", "--out", path_str(&p("o7"))], None);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(p("o7").join("huygens.json").exists());

    assert_eq!(code(&hdw(&["selftest"], None)), 0);
}
