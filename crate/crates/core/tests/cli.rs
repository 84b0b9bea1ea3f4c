use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use eit_bec::cli::preset;
use eit_bec::io::{read_run, RunManifest, MANIFEST};
use eit_bec::{ControlSchedule, Grid1D, SimulationConfig, SolverTier};
use tempfile::TempDir;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eit-bec")).args(args).output().expect("spawn eit-bec")
}

fn write_config(dir: &Path, name: &str, cfg: &SimulationConfig) -> String {
    let p = dir.join(name);
    fs::write(&p, cfg.to_text()).unwrap();
    p.to_str().unwrap().to_owned()
}

fn small_analytic() -> SimulationConfig {
    let mut c = preset("transport").unwrap();
    c.solver_tier = SolverTier::Analytic;
    c.t_final = 1.0;
    c.snapshot_stride = 50;
    c
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn analytic_run_writes_snapshots() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "a.cfg", &small_analytic());
    let out = tmp.path().join("run");
    let o = bin(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let data = read_run(&out).unwrap();
    assert!(!data.envelopes.is_empty());
    assert!(out.join("diagnostics.csv").exists());
}

#[test]
fn unstable_step_is_rejected_with_bound() {
    let tmp = TempDir::new().unwrap();
    let mut c = preset("transport").unwrap();
    c.dt = 1.0;
    c.t_final = 10.0;
    c.snapshot_stride = 1;
    let cfg = write_config(tmp.path(), "bad.cfg", &c);
    let o = bin(&["run", "--config", &cfg, "--out", tmp.path().join("r").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.starts_with("error:") && msg.contains("dt"), "{msg}");
}

#[test]
fn stop_and_release_records_stored_phase() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("sr.cfg");
    let o = bin(&["presets", "stop_and_release", "--out", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("run");
    let o = bin(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let phase = fs::read_to_string(out.join("stored_phase.txt")).unwrap();
    assert!(!phase.trim().is_empty());
}

#[test]
fn compare_self_is_zero_and_grids_must_match() {
    let tmp = TempDir::new().unwrap();
    let c = small_analytic();
    let cfg = write_config(tmp.path(), "a.cfg", &c);
    let a = tmp.path().join("a");
    assert!(bin(&["run", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());

    let o = bin(&["compare", a.to_str().unwrap(), a.to_str().unwrap(), "--mode", "absolute_L2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).filter(|l| !l.starts_with('#')).collect();
    assert!(!rows.is_empty());
    for r in rows {
        let v: f64 = r.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(v, 0.0);
    }

    let mut other = c.clone();
    other.grid = Grid1D::new(512, 100.0).unwrap();
    let cfg_b = write_config(tmp.path(), "b.cfg", &other);
    let b = tmp.path().join("b");
    assert!(bin(&["run", "--config", &cfg_b, "--out", b.to_str().unwrap()]).status.success());
    let o = bin(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("grid"), "{}", stderr(&o));
}

#[test]
fn delta_scan_emits_one_row_per_value() {
    let tmp = TempDir::new().unwrap();
    let mut c = preset("transparency_scan").unwrap();
    c.grid = Grid1D::new(512, 128.0).unwrap();
    let cfg = write_config(tmp.path(), "s.cfg", &c);
    let values: Vec<String> = (0..11).map(|i| format!("{}", -2.0 + 0.4 * i as f64)).collect();
    let o = bin(&["scan", "--config", &cfg, "--param", "Delta", "--values", &values.join(",")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 11);
    for r in rows {
        let t: f64 = r.split(',').nth(1).unwrap().parse().unwrap();
        assert!((0.0..=1.0 + 1e-9).contains(&t), "{r}");
    }
}

#[test]
fn g0_scan_velocity_increases_with_control() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "g.cfg", &small_analytic());
    let out = tmp.path().join("g.csv");
    let o = bin(&["scan", "--config", &cfg, "--param", "G0", "--values", "0.5,1,2,4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Vec<f64> = fs::read_to_string(out)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(v.len(), 4);
    assert!(v.windows(2).all(|w| w[1] > w[0]), "{v:?}");
}

#[test]
fn empty_scan_values_fail() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "g.cfg", &small_analytic());
    let o = bin(&["scan", "--config", &cfg, "--param", "G0", "--values", ""]);
    assert!(!o.status.success());
    assert!(eit_bec::cli::cmd_scan(Path::new(&cfg), eit_bec::cli::ScanParam::G0, &[]).is_err());
}

#[test]
fn runs_are_deterministic_and_manifest_echoes_config() {
    let tmp = TempDir::new().unwrap();
    let mut c = preset("transport").unwrap();
    c.t_final = 0.5;
    c.snapshot_stride = 25;
    c.control = ControlSchedule::constant(1.5);
    let cfg = write_config(tmp.path(), "r.cfg", &c);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let o = bin(&["run", "--config", &cfg, "--out", d.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let mut files: Vec<_> = fs::read_dir(a.join("snapshots")).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    assert!(!files.is_empty());
    for f in files {
        assert_eq!(fs::read(a.join("snapshots").join(&f)).unwrap(), fs::read(b.join("snapshots").join(&f)).unwrap());
    }
    let manifest = RunManifest::from_text(&fs::read_to_string(a.join(MANIFEST)).unwrap()).unwrap();
    assert_eq!(manifest.config, c);
}

#[test]
fn presets_list_and_unknown_name() {
    let o = bin(&["presets"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 5);
    let o = bin(&["presets", "nonexistent"]);
    assert_eq!(o.status.code(), Some(2));
}
