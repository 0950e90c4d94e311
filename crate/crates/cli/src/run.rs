//! Experiment dispatch and persistence of tables, report and manifest.

use crate::config::{emit, InitialData, RunConfig};
use beamlab::experiments::{
    eps_ladder, exp_decomposition, exp_entropy, exp_haraux_suite, exp_k1_decay, exp_k2_exponential, exp_k3_ball,
    exp_lambda_lipschitz, exp_nakao_suite, exp_stationary, exp_two_trajectory, gradient_checks, random_ensemble,
    trajectory_table, write_table, DecompositionConfig, ExperimentReport, K1Options, K2Options, K3Options,
    LipschitzOptions, StationaryOptions, DRIVERS, MONOTONE_TOL,
};
use beamlab::integrator::{energy_identity_residual, integrate, Problem};
use beamlab::laws::{DampingLaw, Forcing};
use beamlab::{ModalState, Result, SpectralModel};
use std::fs;
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub report: ExperimentReport,
    pub artifacts: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed() {
            0
        } else {
            1
        }
    }
}

/// `id`, description and checked claim of every experiment, one per line.
pub fn list_experiments() -> Vec<String> {
    DRIVERS
        .iter()
        .map(|d| format!("{:<22} {} [checks: {}]", d.id, d.description, d.claim))
        .collect()
}

/// Directory owned by one (experiment, seed) pair.
pub fn run_dir(config: &RunConfig) -> PathBuf {
    config
        .output_dir
        .join(format!("{}-seed{}", config.experiment.id, config.seed))
}

fn initial_state(model: &SpectralModel, data: &InitialData, seed: u64) -> ModalState {
    let n = model.n_modes;
    match *data {
        InitialData::Zero => ModalState::zeros(n),
        InitialData::Random { two_e } => random_ensemble(model, seed, 1, (two_e, two_e)).remove(0),
        InitialData::Mode { j, amplitude } => {
            let mut s = ModalState::zeros(n);
            s.a[j - 1] = amplitude;
            s
        }
    }
}

fn random_pair(model: &SpectralModel, data: &InitialData, seed: u64) -> (ModalState, ModalState) {
    let two_e = match *data {
        InitialData::Random { two_e } => two_e,
        _ => crate::config::DEFAULT_ENERGY,
    };
    let mut v = random_ensemble(model, seed, 2, (two_e, two_e));
    let b = v.pop().unwrap();
    (v.pop().unwrap(), b)
}

fn simulate(problem: &Problem<'_>, config: &RunConfig) -> Result<ExperimentReport> {
    let u0 = initial_state(problem.model, &config.experiment.initial, config.seed);
    let traj = integrate(problem, &u0, &config.integrator)?;
    let mut report = ExperimentReport::new("simulate");
    report.constant("energy_identity_residual", energy_identity_residual(&traj));
    report.constant("final_energy", *traj.energy.last().unwrap());
    report.constant("k_lambda", traj.k_lambda);
    if let Ok(omega) = problem.constants.omega(problem.model.sigma[0]) {
        let g = gradient_checks(&traj, omega);
        report.constant("worst_modified_increase", g.worst_increase);
        report.constant("worst_coercivity", g.worst_coercivity);
        if config.damping != DampingLaw::Undamped {
            report.check(
                "lyapunov",
                g.worst_increase <= MONOTONE_TOL,
                format!("max relative increase of modified energy {:.3e}", g.worst_increase),
            );
        }
    }
    report.check(
        "finite",
        traj.states.iter().all(|s| s.is_finite()),
        format!("{} samples up to t = {}", traj.len(), traj.times.last().unwrap()),
    );
    report.tables.push(trajectory_table("trajectory", &traj));
    Ok(report)
}

fn dispatch(config: &RunConfig, model: &SpectralModel) -> Result<ExperimentReport> {
    let e = &config.experiment;
    let n = model.n_modes;
    let h = config.forcing.h.coefficients(n);
    let forcing = Forcing::new(config.forcing.lambda, h.clone())?;
    let cfg = &config.integrator;
    let problem = || Problem::new(model, config.source, config.damping, forcing.clone(), cfg.alpha);
    match e.id.as_str() {
        "simulate" => simulate(&problem()?, config),
        "exp_k1_decay" => {
            let mut opts = K1Options::default();
            if let Some(w) = e.window {
                opts.window = w;
            }
            let u0 = initial_state(model, &e.initial, config.seed);
            exp_k1_decay(&problem()?, &u0, cfg, &opts)
        }
        "exp_k2_exponential" => {
            let mut opts = K2Options::default();
            if let Some(w) = e.window {
                opts.window = w;
            }
            let u0 = initial_state(model, &e.initial, config.seed);
            exp_k2_exponential(&problem()?, &u0, cfg, &opts)
        }
        "exp_k3_ball" => {
            let count = e.count.unwrap_or(10);
            let mut data = random_ensemble(model, config.seed, count, (0.05, 1.0));
            data.extend(random_ensemble(model, config.seed.wrapping_add(1), count, (2.0, 8.0)));
            exp_k3_ball(model, config.damping, &data, cfg, &K3Options::default())
        }
        "exp_two_trajectory" => {
            let (u1, u2) = random_pair(model, &e.initial, config.seed);
            exp_two_trajectory(&problem()?, &u1, &u2, cfg)
        }
        "exp_lambda_lipschitz" => {
            let lambda0 = e.lambda0.unwrap_or(config.forcing.lambda);
            let opts = LipschitzOptions {
                lambdas: e
                    .lambdas
                    .clone()
                    .unwrap_or_else(|| (0..=10).map(|i| i as f64 / 10.0).collect()),
                lambda0,
                t_probe: e.t_probe.unwrap_or(10.0),
            };
            let u0 = initial_state(model, &e.initial, config.seed);
            exp_lambda_lipschitz(model, config.damping, config.source, &h, &u0, cfg.dt, cfg.alpha, &opts)
        }
        "exp_decomposition" => {
            let base = DecompositionConfig::default();
            let dcfg = DecompositionConfig {
                s: e.s.unwrap_or(base.s),
                horizon: cfg.horizon,
                dt: cfg.dt,
                probe_modes: e
                    .probe_modes
                    .clone()
                    .unwrap_or_else(|| base.probe_modes.into_iter().filter(|&j| j <= n).collect()),
                probe_size: e.probe_size.unwrap_or(base.probe_size),
            };
            let (u1, u2) = random_pair(model, &e.initial, config.seed);
            exp_decomposition(&problem()?, &u1, &u2, &dcfg)
        }
        "box_count_entropy" => {
            let data = random_ensemble(model, config.seed, e.count.unwrap_or(20), (2.0, 8.0));
            let eps = e.eps.clone().unwrap_or_else(|| eps_ladder(0.5, 0.05, 6));
            exp_entropy(model, config.damping, &data, cfg, &eps)
        }
        "nakao_suite" => Ok(exp_nakao_suite(
            config.seed,
            e.trials.unwrap_or(1000),
            e.rhos.as_deref().unwrap_or(&[0.0, 0.5, 1.0, 2.0]),
        )),
        "haraux_suite" => Ok(exp_haraux_suite(config.seed, e.trials.unwrap_or(100_000))),
        "stationary" => {
            let mut opts = StationaryOptions {
                seed: config.seed,
                ..Default::default()
            };
            if let Some(l) = &e.lambdas {
                opts.lambdas = l.clone();
            }
            if let Some(r) = e.random_starts {
                opts.random_starts = r;
            }
            exp_stationary(model, &config.source, &h, &opts)
        }
        other => Err(beamlab::Error::InvalidConfig(format!("unknown experiment {other:?}"))),
    }
}

fn manifest(config: &RunConfig, artifacts: &[PathBuf], passed: bool) -> String {
    let mut out = format!(
        "# beamlab {VERSION}\n# experiment {} seed {} status {}\n",
        config.experiment.id,
        config.seed,
        if passed { "pass" } else { "fail" }
    );
    for a in artifacts {
        out.push_str(&format!("# artifact {}\n", a.file_name().unwrap().to_string_lossy()));
    }
    out.push('\n');
    out.push_str(&emit(config));
    out
}

/// Runs the configured experiment and writes everything into
/// [`run_dir`], replacing an earlier run of the same id and seed. A driver
/// error becomes a failed `run` criterion; the report is still written.
pub fn run(config: &RunConfig) -> anyhow::Result<RunOutcome> {
    let m = &config.model;
    let model = SpectralModel::new(m.n_modes, m.length, m.kappa, m.quad_points)?;
    let mut report = dispatch(config, &model).unwrap_or_else(|err| {
        let mut r = ExperimentReport::new(&config.experiment.id);
        r.check("run", false, err.to_string());
        r
    });
    report.id = config.experiment.id.clone();
    report.seed = config.seed;

    let dir = run_dir(config);
    if dir.exists() {
        fs::remove_dir_all(&dir)?;
    }
    fs::create_dir_all(&dir)?;
    let mut artifacts = Vec::new();
    for t in &report.tables {
        artifacts.push(write_table(&dir, t)?);
    }
    let report_path = dir.join("report.txt");
    fs::write(&report_path, report.render())?;
    artifacts.push(report_path);
    let manifest_path = dir.join("manifest.toml");
    fs::write(&manifest_path, manifest(config, &artifacts, report.passed()))?;
    artifacts.push(manifest_path);
    report.artifacts = artifacts.clone();
    Ok(RunOutcome { dir, report, artifacts })
}

/// Reads and parses a config file, or returns the defaults for `None`.
pub fn load_config(path: Option<&Path>) -> anyhow::Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?;
            crate::config::parse_config(&text).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn catalog_matches_drivers() {
        let l = list_experiments();
        assert_eq!(l.len(), DRIVERS.len());
        assert!(l.iter().any(|s| s.starts_with("exp_k3_ball")));
    }

    #[test]
    fn run_dir_is_per_experiment_and_seed() {
        let mut c = parse_config("seed = 7\n[experiment]\nid = \"haraux_suite\"\n").unwrap();
        c.output_dir = PathBuf::from("out");
        assert_eq!(run_dir(&c), PathBuf::from("out/haraux_suite-seed7"));
    }

    #[test]
    fn driver_error_becomes_failed_criterion() {
        // k3 ball under the default k1 law is a configuration mismatch
        let dir = std::env::temp_dir().join(format!("beamlab-unit-{}", std::process::id()));
        let mut c = parse_config("[experiment]\nid = \"exp_k3_ball\"\ncount = 1\n").unwrap();
        c.output_dir = dir.clone();
        let out = run(&c).unwrap();
        assert_eq!(out.exit_code(), 1);
        assert!(!out.report.criterion("run").unwrap().pass);
        assert!(out.dir.join("report.txt").exists());
        fs::remove_dir_all(dir).unwrap();
    }
}
