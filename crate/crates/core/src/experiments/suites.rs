//! Report wrappers for the inequality suites and the stationary sweep.

use super::{random_initial, ExperimentReport, Table};
use crate::error::Result;
use crate::inequalities::{haraux_suite, nakao_suite, NAKAO_TOL};
use crate::laws::{assumption_constants, Forcing, SourceLaw};
use crate::spectral::SpectralModel;
use crate::stationary::{multi_start, stationary_bound_check, DEFAULT_MAX_ITER, DEFAULT_TOL};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn exp_nakao_suite(seed: u64, trials: usize, rhos: &[f64]) -> ExperimentReport {
    let mut report = ExperimentReport::new("nakao_suite").with_seed(seed);
    for (rho, s) in nakao_suite(seed, trials, rhos) {
        report.constant(&format!("rho_{rho}.worst_margin"), s.worst_margin);
        report.check(
            &format!("rho_{rho}"),
            s.violations == 0,
            format!(
                "{} violations in {} trials, worst φ − bound {:.3e} (tolerance {NAKAO_TOL:e})",
                s.violations, s.trials, s.worst_margin
            ),
        );
    }
    report
}

pub fn exp_haraux_suite(seed: u64, trials: usize) -> ExperimentReport {
    let mut report = ExperimentReport::new("haraux_suite").with_seed(seed);
    let s = haraux_suite(seed, trials);
    report.constant("worst_margin", s.worst_margin);
    report.check(
        "haraux",
        s.violations == 0,
        format!(
            "{} violations in {} trials, worst lhs − rhs {:.3e}",
            s.violations, s.trials, s.worst_margin
        ),
    );
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryOptions {
    pub lambdas: Vec<f64>,
    /// Random starts on top of the fixed ladder along the first mode.
    pub random_starts: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        Self {
            lambdas: vec![0.0, 0.5, 1.0],
            random_starts: 8,
            seed: 0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Multi-start minimization for each `λ`; one table row per distinct
/// stationary point: `λ, I, residual, c_1..c_N`.
pub fn exp_stationary(
    model: &SpectralModel,
    source: &SourceLaw,
    h: &[f64],
    opts: &StationaryOptions,
) -> Result<ExperimentReport> {
    let n = model.n_modes;
    let constants = assumption_constants(source, crate::integrator::DEFAULT_CONSTANT_RANGE, 200_001)?;
    let mut starts: Vec<Vec<f64>> = [0.0, 0.01, 1.0, 4.0, 16.0]
        .iter()
        .map(|&s| {
            let mut v = vec![0.0; n];
            v[0] = s;
            v
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_starts {
        starts.push(random_initial(model, &mut rng, 25.0).a);
    }
    let mut report = ExperimentReport::new("stationary").with_seed(opts.seed);
    let mut rows = Vec::new();
    for &lambda in &opts.lambdas {
        let forcing = Forcing::new(lambda, h.to_vec())?;
        let pts = multi_start(model, source, &forcing, &starts, opts.tol, opts.max_iter)?;
        let tag = format!("lambda_{lambda}");
        report.check(
            &format!("{tag}.converged"),
            !pts.is_empty(),
            format!("{} distinct stationary points", pts.len()),
        );
        let mut bound_ok = true;
        let mut worst_ratio: f64 = 0.0;
        for p in &pts {
            let b = stationary_bound_check(model, &constants, &forcing, p)?;
            bound_ok &= b.ok;
            if b.rhs > 0.0 {
                worst_ratio = worst_ratio.max(b.lhs / b.rhs);
            }
            let mut row = vec![lambda, p.functional_value, p.residual];
            row.extend(&p.coeffs);
            rows.push(row);
        }
        report.constant(&format!("{tag}.count"), pts.len() as f64);
        if let Some(best) = pts.first() {
            report.constant(&format!("{tag}.min_value"), best.functional_value);
        }
        report.check(
            &format!("{tag}.bounded"),
            bound_ok,
            format!("max lhs/rhs of the a-priori bound {worst_ratio:.4}"),
        );
    }
    let mut header: Vec<String> = ["lambda", "value", "residual"].map(String::from).to_vec();
    header.extend((1..=n).map(|j| format!("c_{j}")));
    report.tables.push(Table {
        name: "stationary".into(),
        header,
        rows,
    });
    Ok(report)
}
