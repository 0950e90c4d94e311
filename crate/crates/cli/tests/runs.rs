use beamlab::experiments::DRIVERS;
use beamlab_cli::{list_experiments, load_config, parse_config, run, RunConfig};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn catalog_lists_every_driver() {
    let l = list_experiments();
    assert_eq!(l.len(), DRIVERS.len());
    assert!(l.iter().any(|s| s.starts_with("exp_k3_ball ")));
    assert!(l.iter().any(|s| s.starts_with("nakao_suite ")));
}

#[test]
fn simulate_from_rest_stays_at_rest() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = parse_config("[model]\nn_modes = 4\n[experiment]\nid = \"simulate\"\ninitial = \"zero\"\n").unwrap();
    c.output_dir = tmp.path().to_path_buf();
    let out = run(&c).unwrap();
    assert_eq!(out.exit_code(), 0);
    let text = fs::read_to_string(out.dir.join("trajectory.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,E,E_mod,D,phase_norm,a_1,a_2,a_3,a_4,b_1,b_2,b_3,b_4"
    );
    let mut rows = 0;
    for line in lines {
        rows += 1;
        let vals: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(vals[1..].iter().all(|v| *v == 0.0), "{line}");
    }
    assert_eq!(rows, 1001);
}

#[test]
fn same_seed_gives_identical_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "seed = 9\n[model]\nn_modes = 8\n[damping]\nvariant = \"k1\"\n\
                [source]\nvariant = \"double_power\"\n[integrator]\nhorizon = 2.0\n";
    let mut c = parse_config(text).unwrap();
    let mut dirs = Vec::new();
    for sub in ["a", "b"] {
        c.output_dir = tmp.path().join(sub);
        dirs.push(run(&c).unwrap().dir);
    }
    let (a, b) = (csv_files(&dirs[0]), csv_files(&dirs[1]));
    assert!(!a.is_empty());
    assert_eq!(a, b);

    c.seed = 10;
    c.output_dir = tmp.path().join("a");
    let other = run(&c).unwrap().dir;
    assert_ne!(csv_files(&other), a);
    // a different seed owns a different directory
    assert_eq!(csv_files(&dirs[0]), a);
}

#[test]
fn manifest_echoes_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = parse_config("seed = 4\n[experiment]\nid = \"haraux_suite\"\ntrials = 200\n").unwrap();
    c.output_dir = tmp.path().to_path_buf();
    let out = run(&c).unwrap();
    assert_eq!(out.exit_code(), 0);
    let manifest = fs::read_to_string(out.dir.join("manifest.toml")).unwrap();
    assert!(manifest.starts_with(&format!("# beamlab {}", env!("CARGO_PKG_VERSION"))));
    assert_eq!(parse_config(&manifest).unwrap(), c);
    assert!(out.dir.join("report.txt").exists());
}

#[test]
fn k1_reference_config_passes() {
    let mut c = load_config(Some(&repo_config("exp_k1_decay.toml"))).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    c.output_dir = tmp.path().to_path_buf();
    let out = run(&c).unwrap();
    assert_eq!(out.exit_code(), 0, "{}", out.report.render());
    assert!(out.dir.join("envelopes.csv").exists());
}

#[test]
fn reference_configs_parse() {
    let dir = repo_config("");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let c: RunConfig = load_config(Some(&p)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(p.file_stem().unwrap().to_string_lossy(), c.experiment.id);
        n += 1;
    }
    assert!(n >= 5);
}

fn beamlab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_beamlab")).args(args).output().unwrap()
}

#[test]
fn binary_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();

    let list = beamlab(&["list"]);
    assert!(list.status.success());
    assert_eq!(String::from_utf8_lossy(&list.stdout).lines().count(), DRIVERS.len());

    let ok = beamlab(&["haraux-suite", "--seed", "3", "--out", out, "--quiet"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(tmp.path().join("haraux_suite-seed3/report.txt").exists());

    // the default k1 law does not fit the k3 experiment: failed report, exit 1
    let fail = beamlab(&["exp", "exp_k3_ball", "--out", out, "--quiet"]);
    assert_eq!(fail.status.code(), Some(1));
    assert!(tmp.path().join("exp_k3_ball-seed0/report.txt").exists());

    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[forcing]\nlambda = 1.5\n").unwrap();
    let err = beamlab(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(err.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&err.stderr).contains("line 2"));

    let unknown = beamlab(&["exp", "exp_nothing", "--out", out]);
    assert_eq!(unknown.status.code(), Some(2));
}
