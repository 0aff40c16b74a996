use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use swlab_cli::config::RunConfig;

fn swlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swlab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const TINY: &str = "scenario = \"smalldata\"
seed = 4
grid.n = 32
grid.length = \"8pi\"
params.n_fried = 8
data.amplitude = 1e-3
step.dt = 0.1
step.t_end = 1.0
probes.every = 5
";

#[test]
fn shipped_configs_parse_and_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert_eq!(seen, 4);
}

#[test]
fn invalid_grid_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "grid.n = 7\n");
    let out = swlab(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = swlab(&["run", tmp.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = write_config(tmp.path(), "typo.toml", "grid.nn = 64\n");
    assert_eq!(swlab(&["run", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn smalldata_run_writes_reproducible_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "tiny.toml", TINY);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let out = swlab(&["run", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["manifest.json", "series.csv", "norms.csv", "steps.csv", "energy.csv", "plot.gp", "dumps/bands.csv", "dumps/state_0000.csv"] {
        let x = fs::read(a.join(f)).unwrap();
        let y = fs::read(b.join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between identical runs");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "pass");
    assert_eq!(manifest["psi_profile_id"], "bump-ratio-exp-inv");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    let header = fs::read_to_string(a.join("norms.csv")).unwrap();
    assert!(header.starts_with("quantity,s,t,p,T,value,grid_N,grid_L,psi_profile_id"));
}

#[test]
fn seed_flag_changes_the_data() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "tiny.toml", TINY);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    swlab(&["run", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    swlab(&["--seed", "99", "run", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_ne!(fs::read(a.join("series.csv")).unwrap(), fs::read(b.join("series.csv")).unwrap());
}

#[test]
fn blow_up_exits_with_3_and_keeps_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let body = TINY.replace("data.amplitude = 1e-3", "data.amplitude = 50.0");
    let cfg = write_config(tmp.path(), "big.toml", &body);
    let dir = tmp.path().join("run");
    let out = swlab(&["run", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "blow-up");
    assert!(dir.join("series.csv").exists());
}

#[test]
fn study_subcommand_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "tiny.toml", TINY);
    let dir = tmp.path().join("one");
    let out = swlab(&["study", "--n", "8", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let table = fs::read_to_string(dir.join("study.csv")).unwrap();
    assert!(table.lines().count() <= 1);

    let dir = tmp.path().join("same");
    swlab(&["study", "--n", "8,8", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    let mut rdr = csv::Reader::from_path(dir.join("study.csv")).unwrap();
    let row = rdr.records().next().unwrap().unwrap();
    assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);

    let out = swlab(&["study", "--n", "8,4", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_subcommand_passes() {
    let out = swlab(&["check"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().filter(|l| l.starts_with("PASS")).count(), 6);
}
