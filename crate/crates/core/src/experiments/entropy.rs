//! Greedy ε-covering counts and the resulting dimension estimate.

use super::{exp_k3_ball, ExperimentReport, K3Options, Table};
use crate::error::{Error, Result};
use crate::functionals::least_squares;
use crate::integrator::IntegratorConfig;
use crate::laws::DampingLaw;
use crate::spectral::{ModalState, SpectralModel};
use rayon::prelude::*;
use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyEstimate {
    pub eps: Vec<f64>,
    pub counts: Vec<usize>,
    /// `H_ε = ln N(ε)`.
    pub entropy: Vec<f64>,
    /// Slope of `H_ε` against `ln(1/ε)`.
    pub dimension: f64,
}

fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Centres are taken in input order; each covers every point within `ε`.
fn greedy_count(points: &[Vec<f64>], eps: f64) -> usize {
    let e2 = eps * eps;
    let mut covered = vec![false; points.len()];
    let mut count = 0;
    for i in 0..points.len() {
        if covered[i] {
            continue;
        }
        count += 1;
        let c = &points[i];
        covered[i..]
            .par_iter_mut()
            .zip(&points[i..])
            .with_min_len(1024)
            .for_each(|(flag, p)| {
                if !*flag && dist_sq(c, p) <= e2 {
                    *flag = true;
                }
            });
    }
    count
}

pub fn box_count_entropy(points: &[Vec<f64>], eps: &[f64]) -> Result<EntropyEstimate> {
    if points.is_empty() {
        return Err(Error::Domain("point cloud is empty".into()));
    }
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::Domain("every ε must be positive and finite".into()));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain("ε list must be strictly decreasing".into()));
    }
    let d = points[0].len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::LengthMismatch {
            expected: d,
            got: points.iter().map(|p| p.len()).find(|l| *l != d).unwrap(),
        });
    }
    let counts: Vec<usize> = eps.iter().map(|&e| greedy_count(points, e)).collect();
    let entropy: Vec<f64> = counts.iter().map(|&n| (n as f64).ln()).collect();
    let dimension = if eps.len() < 2 {
        0.0
    } else {
        let pts: Vec<(f64, f64)> = eps.iter().zip(&entropy).map(|(e, h)| (-e.ln(), *h)).collect();
        least_squares(&pts).slope
    };
    Ok(EntropyEstimate {
        eps: eps.to_vec(),
        counts,
        entropy,
        dimension,
    })
}

/// `n` equally spaced points of the unit circle in the first two of `dim`
/// coordinates.
pub fn circle_cloud(n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let th = TAU * i as f64 / n as f64;
            let mut p = vec![0.0; dim.max(2)];
            p[0] = th.cos();
            p[1] = th.sin();
            p
        })
        .collect()
}

/// `side²` grid points of the flat torus `S¹ × S¹ ⊂ ℝ⁴`.
pub fn torus_cloud(side: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(side * side);
    for i in 0..side {
        let th = TAU * i as f64 / side as f64;
        for j in 0..side {
            let ph = TAU * j as f64 / side as f64;
            out.push(vec![th.cos(), th.sin(), ph.cos(), ph.sin()]);
        }
    }
    out
}

/// Geometric ε ladder from `hi` down to `lo`.
pub fn eps_ladder(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| hi * (lo / hi).powf(i as f64 / (n - 1).max(1) as f64))
        .collect()
}

/// k3 end states from outside-ball data, checked against the unit sphere,
/// followed by their covering entropy and the synthetic calibrations.
pub fn exp_entropy(
    model: &SpectralModel,
    damping: DampingLaw,
    initials: &[ModalState],
    cfg: &IntegratorConfig,
    eps: &[f64],
) -> Result<ExperimentReport> {
    let k3 = exp_k3_ball(model, damping, initials, cfg, &K3Options::default())?;
    let mut report = ExperimentReport::new("box_count_entropy");
    let cloud: Vec<Vec<f64>> = k3
        .tables
        .iter()
        .find(|t| t.name == "end_states")
        .map(|t| t.rows.iter().map(|r| r[1..].to_vec()).collect())
        .unwrap_or_default();
    let worst = cloud
        .iter()
        .map(|p| (p.iter().map(|x| x * x).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    report.constant("end_states", cloud.len() as f64);
    report.constant("sphere_distance", worst);
    report.check(
        "end_states_on_sphere",
        !cloud.is_empty() && worst <= 1e-3,
        format!("max |2E − 1| over {} end states: {worst:.3e}", cloud.len()),
    );
    if !cloud.is_empty() {
        let est = box_count_entropy(&cloud, eps)?;
        report.constant("end_state_dimension", est.dimension);
        report.tables.push(entropy_table("end_states_entropy", &est));
    }
    let circle = box_count_entropy(&circle_cloud(10_000, 2), &eps_ladder(0.5, 0.005, 8))?;
    report.constant("circle_dimension", circle.dimension);
    report.check(
        "circle_dimension",
        (circle.dimension - 1.0).abs() <= 0.2,
        format!("estimate {:.4}", circle.dimension),
    );
    let torus = box_count_entropy(&torus_cloud(200), &eps_ladder(0.8, 0.1, 8))?;
    report.constant("torus_dimension", torus.dimension);
    report.check(
        "torus_dimension",
        (torus.dimension - 2.0).abs() <= 0.3,
        format!("estimate {:.4}", torus.dimension),
    );
    report.tables.push(entropy_table("circle_entropy", &circle));
    report.tables.push(entropy_table("torus_entropy", &torus));
    Ok(report)
}

fn entropy_table(name: &str, est: &EntropyEstimate) -> Table {
    Table {
        name: name.into(),
        header: ["eps", "count", "entropy"].map(String::from).to_vec(),
        rows: est
            .eps
            .iter()
            .zip(&est.counts)
            .zip(&est.entropy)
            .map(|((e, n), h)| vec![*e, *n as f64, *h])
            .collect(),
    }
}
