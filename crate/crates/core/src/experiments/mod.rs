//! Experiment drivers that confront simulations with the decay, attractor
//! and stability estimates. Every driver returns an [`ExperimentReport`]
//! holding pass/fail criteria, fitted constants and in-memory tables; the
//! harness decides where tables are written.

mod decay;
mod entropy;
mod pairs;
mod suites;

pub use decay::{exp_k1_decay, exp_k2_exponential, exp_k3_ball, K1Options, K2Options, K3Options};
pub use entropy::{box_count_entropy, circle_cloud, eps_ladder, exp_entropy, torus_cloud, EntropyEstimate};
pub use pairs::{exp_decomposition, exp_lambda_lipschitz, exp_two_trajectory, DecompositionConfig, LipschitzOptions};
pub use suites::{exp_haraux_suite, exp_nakao_suite, exp_stationary, StationaryOptions};

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::spectral::{ModalState, SpectralModel};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Named numeric table, written as CSV by [`write_table`].
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub id: String,
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
    pub constants: Vec<(String, f64)>,
    pub tables: Vec<Table>,
    /// Files written for the tables, filled in by the harness.
    pub artifacts: Vec<PathBuf>,
}

impl ExperimentReport {
    pub fn new(id: &str) -> Self {
        Self {
            id: id.to_string(),
            seed: 0,
            criteria: Vec::new(),
            constants: Vec::new(),
            tables: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.criteria.push(CriterionResult {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn constant(&mut self, name: &str, value: f64) {
        self.constants.push((name.to_string(), value));
    }

    pub fn get_constant(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn criterion(&self, name: &str) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    /// Merge another report's criteria and constants under a prefix.
    pub fn absorb(&mut self, prefix: &str, other: ExperimentReport) {
        for c in other.criteria {
            self.criteria.push(CriterionResult {
                name: format!("{prefix}.{}", c.name),
                ..c
            });
        }
        for (n, v) in other.constants {
            self.constants.push((format!("{prefix}.{n}"), v));
        }
        for mut t in other.tables {
            t.name = format!("{prefix}_{}", t.name);
            self.tables.push(t);
        }
    }

    /// Plain-text report: one line per criterion, then constants.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment {}", self.id);
        let _ = writeln!(s, "seed {}", self.seed);
        let _ = writeln!(s, "status {}", if self.passed() { "PASS" } else { "FAIL" });
        for c in &self.criteria {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "[{tag}] {}: {}", c.name, c.detail);
        }
        for (n, v) in &self.constants {
            let _ = writeln!(s, "{n} = {}", fmt17(*v));
        }
        for a in &self.artifacts {
            let _ = writeln!(s, "artifact {}", a.display());
        }
        s
    }
}

/// Full-precision float formatting used in every output file.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Columns `t, E, E_mod, D, phase_norm, a_1..a_N, b_1..b_N`.
pub fn trajectory_table(name: &str, traj: &Trajectory) -> Table {
    let n = traj.states.first().map_or(0, |s| s.dim());
    let mut header: Vec<String> = ["t", "E", "E_mod", "D", "phase_norm"].map(String::from).to_vec();
    header.extend((1..=n).map(|j| format!("a_{j}")));
    header.extend((1..=n).map(|j| format!("b_{j}")));
    let rows = (0..traj.len())
        .map(|i| {
            let s = &traj.states[i];
            let mut r = vec![
                traj.times[i],
                traj.energy[i],
                traj.modified[i],
                traj.dissipation[i],
                traj.phase_norm[i],
            ];
            r.extend(&s.a);
            r.extend(&s.b);
            r
        })
        .collect();
    Table {
        name: name.to_string(),
        header,
        rows,
    }
}

pub fn write_table(dir: &Path, table: &Table) -> Result<PathBuf> {
    let path = dir.join(format!("{}.csv", table.name));
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Io(e.to_string()))?;
    w.write_record(&table.header).map_err(|e| Error::Io(e.to_string()))?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| fmt17(*v)))
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(path)
}

/// Gaussian modal coefficients with spectral decay `j^{−2}`, rescaled so
/// that `‖A₁^{1/2}a‖² + κ‖A^{1/2}a‖² + ‖b‖² = two_e`.
pub fn random_initial<R: Rng>(model: &SpectralModel, rng: &mut R, two_e: f64) -> ModalState {
    let n = model.n_modes;
    let mut draw = || -> Vec<f64> {
        (1..=n)
            .map(|j| {
                let z: f64 = rng.sample(StandardNormal);
                z / (j * j) as f64
            })
            .collect()
    };
    let a = draw();
    let b = draw();
    let mut s = ModalState { a, b, t: 0.0 };
    let q = quadratic_two_e(model, &s);
    if q > 0.0 {
        let scale = (two_e / q).sqrt();
        s.a.iter_mut().chain(s.b.iter_mut()).for_each(|x| *x *= scale);
    }
    s
}

/// `‖A₁^{1/2}a‖² + κ‖A^{1/2}a‖² + ‖b‖²`, i.e. twice the energy without
/// source and forcing.
pub fn quadratic_two_e(model: &SpectralModel, s: &ModalState) -> f64 {
    let memb: f64 = model.mu.iter().zip(&s.a).map(|(m, a)| m * a * a).sum();
    model.phase_norm_sq(s) + model.kappa * memb
}

/// Seeded ensemble with `2E(0)` drawn uniformly from `range`.
pub fn random_ensemble(model: &SpectralModel, seed: u64, count: usize, range: (f64, f64)) -> Vec<ModalState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let target = if range.1 > range.0 {
                rng.random_range(range.0..=range.1)
            } else {
                range.0
            };
            random_initial(model, &mut rng, target)
        })
        .collect()
}

/// Outcome of the Lyapunov and coercivity checks on one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientChecks {
    /// Largest increase `Ẽ(t_{i+1}) − Ẽ(t_i)` relative to `Ẽ(0)`.
    pub worst_increase: f64,
    /// Largest `(ω/4)‖U‖²_𝓗 − Ẽ`; `≤ 0` when the coercivity bound holds.
    pub worst_coercivity: f64,
}

/// Relative slack for "non-increasing" on sampled energies.
pub const MONOTONE_TOL: f64 = 1e-10;

impl GradientChecks {
    pub fn ok(&self) -> bool {
        self.worst_increase <= MONOTONE_TOL && self.worst_coercivity <= 0.0
    }
}

pub fn gradient_checks(traj: &Trajectory, omega: f64) -> GradientChecks {
    let scale = traj.modified.first().map_or(1.0, |e| e.abs().max(f64::MIN_POSITIVE));
    let worst_increase = traj
        .modified
        .windows(2)
        .map(|w| (w[1] - w[0]) / scale)
        .fold(f64::NEG_INFINITY, f64::max);
    let worst_coercivity = traj
        .modified
        .iter()
        .zip(&traj.phase_norm)
        .map(|(e, p)| 0.25 * omega * p * p - e)
        .fold(f64::NEG_INFINITY, f64::max);
    GradientChecks {
        worst_increase,
        worst_coercivity,
    }
}

pub(crate) fn record_gradient(report: &mut ExperimentReport, label: &str, traj: &Trajectory, omega: f64) {
    let g = gradient_checks(traj, omega);
    report.check(
        &format!("{label}lyapunov"),
        g.worst_increase <= MONOTONE_TOL,
        format!("max relative increase of modified energy {:.3e}", g.worst_increase),
    );
    report.check(
        &format!("{label}coercive"),
        g.worst_coercivity <= 0.0,
        format!("max of (ω/4)·phase_norm² − modified energy {:.3e}", g.worst_coercivity),
    );
}

pub struct DriverInfo {
    pub id: &'static str,
    pub description: &'static str,
    pub claim: &'static str,
}

/// Every driver the harness can dispatch.
pub const DRIVERS: &[DriverInfo] = &[
    DriverInfo {
        id: "exp_k1_decay",
        description: "degenerate monomial damping: two-sided envelopes and log-log decay rate",
        claim: "E(t) decays exactly like t^(-1/q), phase norm like t^(-1/(2q))",
    },
    DriverInfo {
        id: "exp_k2_exponential",
        description: "strictly positive damping: exponential fit, forced floor 8K",
        claim: "modified energy ≤ C·Ẽ(0)·exp(-ct) + 8K",
    },
    DriverInfo {
        id: "exp_k3_ball",
        description: "threshold damping: conservation inside, convergence to the unit sphere outside",
        claim: "the closed ball 2E ≤ 1 is a noncompact global attractor",
    },
    DriverInfo {
        id: "exp_two_trajectory",
        description: "distance of two trajectories against the key-inequality shape",
        claim: "stabilizability estimate with fitted constants",
    },
    DriverInfo {
        id: "exp_lambda_lipschitz",
        description: "trajectory dependence on the forcing parameter",
        claim: "‖S_λ(t)U − S_λ0(t)U‖ ≤ Q(t)|λ − λ0|",
    },
    DriverInfo {
        id: "exp_decomposition",
        description: "u = v + z splitting under constant damping: contraction and smoothing",
        claim: "exponentially stable linear part plus a compact nonlinear part",
    },
    DriverInfo {
        id: "box_count_entropy",
        description: "greedy ε-covering of k3 end states and synthetic manifolds",
        claim: "ε-entropy scaling gives the covering dimension",
    },
    DriverInfo {
        id: "nakao_suite",
        description: "randomized check of the generalized Nakao inequality, ρ = 0 and ρ > 0",
        claim: "window hypothesis implies geometric or polynomial decay",
    },
    DriverInfo {
        id: "haraux_suite",
        description: "randomized check of the power-difference estimate",
        claim: "|‖u‖^r − ‖v‖^r| ≤ r·max(‖u‖,‖v‖)^(r-1)·‖u − v‖",
    },
    DriverInfo {
        id: "stationary",
        description: "Euler–Lagrange minimization over a λ sweep with the a-priori bound",
        claim: "stationary set is bounded; strong focusing gives a second equilibrium",
    },
];

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ensemble_is_seeded_and_scaled() {
        let m = SpectralModel::with_default_grid(12, PI, 0.3).unwrap();
        let a = random_ensemble(&m, 4, 5, (2.0, 8.0));
        let b = random_ensemble(&m, 4, 5, (2.0, 8.0));
        assert_eq!(a, b);
        assert_ne!(a, random_ensemble(&m, 5, 5, (2.0, 8.0)));
        for s in &a {
            let e = quadratic_two_e(&m, s);
            assert!((2.0..=8.0 + 1e-12).contains(&e));
        }
        let one = random_ensemble(&m, 1, 3, (1.5, 1.5));
        assert!(one.iter().all(|s| (quadratic_two_e(&m, s) - 1.5).abs() < 1e-13));
    }

    #[test]
    fn report_rendering() {
        let mut r = ExperimentReport::new("demo").with_seed(9);
        r.check("first", true, "fine");
        r.constant("rate", 0.1);
        assert!(r.passed());
        r.check("second", false, "broken");
        assert!(!r.passed());
        let text = r.render();
        assert!(text.contains("[FAIL] second: broken"));
        assert!(text.contains("rate = 1.0000000000000001e-1"));
        assert!(text.contains("seed 9"));
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn driver_ids_unique() {
        let mut ids: Vec<_> = DRIVERS.iter().map(|d| d.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), DRIVERS.len());
    }
}
