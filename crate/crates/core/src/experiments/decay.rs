//! Decay experiments for the three damping classes.

use super::{record_gradient, trajectory_table, ExperimentReport, Table, MONOTONE_TOL};
use crate::error::{Error, Result};
use crate::functionals::{decay_envelopes, envelope_constants, fit_exp_rate, fit_power_rate, SampledSeries};
use crate::integrator::{integrate, IntegratorConfig, Problem, Trajectory};
use crate::laws::{DampingLaw, Forcing, SourceLaw};
use crate::spectral::{ModalState, SpectralModel};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K1Options {
    /// Fit window for the log-log slopes.
    pub window: (f64, f64),
    /// Relative slack on both envelopes.
    pub slack: f64,
    /// Relative tolerance on the fitted slopes.
    pub slope_tol: f64,
}

impl Default for K1Options {
    fn default() -> Self {
        Self {
            window: (1e2, 1e4),
            slack: 0.02,
            slope_tol: 0.15,
        }
    }
}

fn series(traj: &Trajectory, y: &[f64]) -> Result<SampledSeries> {
    SampledSeries::new(traj.times.clone(), y.to_vec())
}

pub fn exp_k1_decay(
    problem: &Problem<'_>,
    initial: &ModalState,
    cfg: &IntegratorConfig,
    opts: &K1Options,
) -> Result<ExperimentReport> {
    let DampingLaw::K1Monomial { gamma, q } = problem.damping else {
        return Err(Error::InvalidConfig("exp_k1_decay needs the k1 monomial law".into()));
    };
    let model = problem.model;
    let traj = integrate(problem, initial, cfg)?;
    let mut report = ExperimentReport::new("exp_k1_decay");
    let e0 = traj.modified[0];
    let omega = problem.constants.omega(model.sigma[0])?;
    record_gradient(&mut report, "", &traj, omega);

    if e0 > 0.0 {
        let p = envelope_constants(q, gamma, problem.alpha, model, &problem.constants, &problem.forcing, e0)?;
        report.constant("c_lower", p.c_lower);
        report.constant("c_bar", p.c_bar);
        report.constant("c_upper", p.c_upper);
        report.constant("k_lambda", p.k_lambda);
        let mut worst_lower = f64::NEG_INFINITY;
        let mut worst_upper = f64::NEG_INFINITY;
        let mut rows = Vec::with_capacity(traj.len());
        for (&t, &e) in traj.times.iter().zip(&traj.modified) {
            let (lo, hi) = decay_envelopes(&p, t);
            worst_lower = worst_lower.max(lo * (1.0 - opts.slack) - e);
            worst_upper = worst_upper.max(e - hi * (1.0 + opts.slack));
            rows.push(vec![t, lo, e, hi]);
        }
        report.check(
            "lower_envelope",
            worst_lower <= 0.0,
            format!("max of (1−slack)·lower − Ẽ: {worst_lower:.3e}"),
        );
        report.check(
            "upper_envelope",
            worst_upper <= 0.0,
            format!("max of Ẽ − (1+slack)·upper: {worst_upper:.3e}"),
        );
        report.tables.push(Table {
            name: "envelopes".into(),
            header: ["t", "lower", "E_mod", "upper"].map(String::from).to_vec(),
            rows,
        });
    } else {
        report.check("lower_envelope", true, "zero data, envelopes vacuous");
        report.check("upper_envelope", true, "zero data, envelopes vacuous");
    }

    // the optimal-rate statement concerns the unforced, source-free flow
    if problem.k_lambda()? == 0.0 && e0 > 0.0 {
        let se = series(&traj, &traj.modified)?;
        let sp = series(&traj, &traj.phase_norm)?;
        let want_e = -1.0 / q;
        let want_p = -0.5 / q;
        for (name, s, want) in [("rate_energy", se, want_e), ("rate_phase_norm", sp, want_p)] {
            match fit_power_rate(&s, opts.window) {
                Ok(fit) => {
                    report.constant(&format!("{name}.slope"), fit.slope);
                    report.constant(&format!("{name}.r2"), fit.r2);
                    let ok = (fit.slope - want).abs() <= opts.slope_tol * want.abs();
                    report.check(name, ok, format!("slope {:.4} against {want:.4}", fit.slope));
                }
                Err(e) => report.check(name, false, format!("fit failed: {e}")),
            }
        }
    }
    report.tables.push(trajectory_table("trajectory", &traj));
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K2Options {
    /// Window of the exponential fit in the homogeneous case.
    pub window: (f64, f64),
    pub r2_min: f64,
    /// Number of trial rates in the forced `(C, c)` search.
    pub rate_grid: usize,
}

impl Default for K2Options {
    fn default() -> Self {
        Self {
            window: (5.0, 60.0),
            r2_min: 0.999,
            rate_grid: 4000,
        }
    }
}

/// Forced fit of `Ẽ(t) ≤ C·Ẽ(0)e^{−ct} + floor`: for each trial rate the
/// smallest feasible `C`, keeping the pair with least squared residual.
/// Returns `(C, c, max residual)`.
pub(crate) fn fit_floor_exponential(t: &[f64], y: &[f64], floor: f64, grid: usize) -> Option<(f64, f64, f64)> {
    let y0 = y[0];
    let horizon = *t.last()?;
    if !(y0 > 0.0) || horizon <= 0.0 {
        return None;
    }
    let c_max = (600.0 / horizon).min(50.0);
    let c_min = 1e-6f64.min(c_max);
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 0..grid {
        let c = c_min * (c_max / c_min).powf(i as f64 / (grid - 1).max(1) as f64);
        let big_c = t
            .iter()
            .zip(y)
            .map(|(&t, &y)| (y - floor).max(0.0) * (c * t).exp() / y0)
            .fold(0.0, f64::max);
        let sse: f64 = t
            .iter()
            .zip(y)
            .map(|(&t, &y)| (y - big_c * y0 * (-c * t).exp() - floor).powi(2))
            .sum();
        if best.is_none_or(|b| sse < b.2) {
            best = Some((big_c, c, sse));
        }
    }
    let (big_c, c, _) = best?;
    let worst = t
        .iter()
        .zip(y)
        .map(|(&t, &y)| y - (big_c * y0 * (-c * t).exp() + floor))
        .fold(f64::NEG_INFINITY, f64::max);
    Some((big_c, c, worst))
}

pub fn exp_k2_exponential(
    problem: &Problem<'_>,
    initial: &ModalState,
    cfg: &IntegratorConfig,
    opts: &K2Options,
) -> Result<ExperimentReport> {
    if !matches!(problem.damping, DampingLaw::K2Positive { .. }) {
        return Err(Error::InvalidConfig("exp_k2_exponential needs a k2 law".into()));
    }
    let traj = integrate(problem, initial, cfg)?;
    let mut report = ExperimentReport::new("exp_k2_exponential");
    let omega = problem.constants.omega(problem.model.sigma[0])?;
    record_gradient(&mut report, "", &traj, omega);
    let k = problem.k_lambda()?;
    report.constant("k_lambda", k);
    if k == 0.0 {
        match fit_exp_rate(&series(&traj, &traj.modified)?, opts.window) {
            Ok(fit) => {
                report.constant("rate", fit.rate);
                report.constant("amplitude", fit.amplitude);
                report.constant("r2", fit.r2);
                report.check("positive_rate", fit.rate > 0.0, format!("c = {:.6}", fit.rate));
                report.check(
                    "exp_fit_quality",
                    fit.r2 >= opts.r2_min,
                    format!("r² = {:.6} (need ≥ {})", fit.r2, opts.r2_min),
                );
            }
            Err(e) => report.check("exp_fit_quality", false, format!("fit failed: {e}")),
        }
    } else {
        let floor = 8.0 * k;
        match fit_floor_exponential(&traj.times, &traj.modified, floor, opts.rate_grid) {
            Some((big_c, c, worst)) => {
                report.constant("C", big_c);
                report.constant("rate", c);
                report.constant("worst_residual", worst);
                let tol = 1e-12 * traj.modified[0].abs().max(1.0);
                report.check(
                    "floor_fit_feasible",
                    worst <= tol && c > 0.0,
                    format!("C = {big_c:.4}, c = {c:.4}, max residual {worst:.3e}"),
                );
            }
            None => report.check("floor_fit_feasible", false, "no feasible (C, c)"),
        }
        let last = *traj.modified.last().unwrap();
        report.check(
            "below_floor",
            last <= floor,
            format!("terminal Ẽ = {last:.6}, 8K = {floor:.6}"),
        );
    }
    report.tables.push(trajectory_table("trajectory", &traj));
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K3Options {
    /// Relative energy drift allowed for data inside the ball.
    pub drift_tol: f64,
    /// Required closeness `|2E − 1|` for data outside the ball.
    pub sphere_tol: f64,
}

impl Default for K3Options {
    fn default() -> Self {
        Self {
            drift_tol: 1e-10,
            sphere_tol: 1e-3,
        }
    }
}

/// Runs every datum under the k3 law with `f = 0`, `h = 0`; data with
/// `2E(0) ≤ 1` are checked for conservation, the rest for monotone
/// convergence to the sphere `2E = 1`. Terminal states of the outside runs
/// are stored in the `end_states` table (phase coordinates).
pub fn exp_k3_ball(
    model: &SpectralModel,
    damping: DampingLaw,
    initials: &[ModalState],
    cfg: &IntegratorConfig,
    opts: &K3Options,
) -> Result<ExperimentReport> {
    if !matches!(damping, DampingLaw::K3Threshold { .. }) {
        return Err(Error::InvalidConfig("exp_k3_ball needs a k3 law".into()));
    }
    let problem = Problem::new(model, SourceLaw::Zero, damping, Forcing::zero(model.n_modes), cfg.alpha)?;
    let runs: Vec<Trajectory> = initials
        .par_iter()
        .map(|u| integrate(&problem, u, cfg))
        .collect::<Result<_>>()?;
    let mut report = ExperimentReport::new("exp_k3_ball");
    let mut inside_drift: f64 = 0.0;
    let (mut n_in, mut n_out) = (0, 0);
    let mut monotone = true;
    let mut worst_increase: f64 = 0.0;
    let mut worst_final: f64 = 0.0;
    let mut latest_hit: f64 = 0.0;
    let mut all_hit = true;
    let mut dist_ok = true;
    let mut end_rows = Vec::new();
    let mut coercive_ok = true;
    for (idx, traj) in runs.iter().enumerate() {
        let two_e: Vec<f64> = traj.energy.iter().map(|e| 2.0 * e).collect();
        let g = super::gradient_checks(traj, 1.0);
        coercive_ok &= g.worst_coercivity <= 0.0;
        if two_e[0] <= 1.0 {
            n_in += 1;
            if two_e[0] > 0.0 {
                let drift = two_e.iter().map(|e| (e - two_e[0]).abs()).fold(0.0, f64::max) / two_e[0];
                inside_drift = inside_drift.max(drift);
            }
            continue;
        }
        n_out += 1;
        let inc = two_e
            .windows(2)
            .map(|w| (w[1] - w[0]) / two_e[0])
            .fold(f64::NEG_INFINITY, f64::max);
        worst_increase = worst_increase.max(inc);
        monotone &= inc <= MONOTONE_TOL;
        match traj
            .times
            .iter()
            .zip(&two_e)
            .find(|(_, e)| (*e - 1.0).abs() <= opts.sphere_tol)
        {
            Some((t, _)) => latest_hit = latest_hit.max(*t),
            None => all_hit = false,
        }
        // distance to the ball in the phase norm, against [2E]^{1/2} − 1
        let dist: Vec<f64> = traj.phase_norm.iter().map(|p| (p - 1.0).max(0.0)).collect();
        let bound_ok = dist
            .iter()
            .zip(&two_e)
            .all(|(d, e)| *d <= (e.sqrt() - 1.0).max(0.0) + 1e-12);
        let decreasing = dist.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        let final_dist = *dist.last().unwrap();
        dist_ok &= bound_ok && decreasing && final_dist <= opts.sphere_tol;
        worst_final = worst_final.max((two_e.last().unwrap() - 1.0).abs());
        let mut row = vec![idx as f64];
        row.extend(model.phase_coordinates(traj.last()));
        end_rows.push(row);
    }
    report.constant("inside_runs", n_in as f64);
    report.constant("outside_runs", n_out as f64);
    report.constant("inside_max_drift", inside_drift);
    report.constant("outside_latest_hit", latest_hit);
    report.constant("outside_worst_final", worst_final);
    if n_in > 0 {
        report.check(
            "inside_conserved",
            inside_drift <= opts.drift_tol,
            format!("max relative drift {inside_drift:.3e} over {n_in} runs"),
        );
    }
    if n_out > 0 {
        report.check(
            "outside_monotone",
            monotone,
            format!("max relative increase of 2E {worst_increase:.3e}"),
        );
        report.check(
            "outside_reaches_sphere",
            all_hit,
            format!(
                "|2E − 1| ≤ {} by t = {latest_hit} (all {n_out} runs: {all_hit})",
                opts.sphere_tol
            ),
        );
        report.check(
            "distance_to_ball",
            dist_ok,
            "dist ≤ [2E]^{1/2} − 1, decreasing, final ≤ tolerance",
        );
    }
    report.check("coercive", coercive_ok, "(ω/4)·phase_norm² ≤ Ẽ at all samples");
    let n = model.n_modes;
    let mut header = vec!["run".to_string()];
    header.extend((1..=n).map(|j| format!("x_{j}")));
    header.extend((1..=n).map(|j| format!("y_{j}")));
    report.tables.push(Table {
        name: "end_states".into(),
        header,
        rows: end_rows,
    });
    for (i, traj) in runs.iter().enumerate() {
        report.tables.push(trajectory_table(&format!("trajectory_{i}"), traj));
    }
    Ok(report)
}
