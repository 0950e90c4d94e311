//! Experiments on pairs of trajectories: stabilizability, dependence on λ,
//! and the `u = v + z` splitting under constant damping.

use super::{record_gradient, ExperimentReport, Table};
use crate::error::{Error, Result};
use crate::functionals::{e_alpha, fit_exp_rate, SampledSeries};
use crate::integrator::{integrate, kick, IntegratorConfig, Problem, Rotation, Trajectory};
use crate::laws::{DampingLaw, Forcing, K2Kind, SourceLaw};
use crate::spectral::{ModalState, SpectralModel};
use rayon::prelude::*;

fn diff_norm_sq(model: &SpectralModel, x: &ModalState, y: &ModalState) -> f64 {
    model.phase_norm_sq(&x.diff(y))
}

/// `‖A^α w‖² + ‖w‖²_{L^{p+2}}` for the displacement part of `w`.
fn lower_order(problem: &Problem<'_>, w: &ModalState) -> f64 {
    let model = problem.model;
    let a_part = e_alpha(
        model,
        problem.alpha,
        &ModalState::new(w.a.clone(), vec![0.0; w.dim()]).unwrap(),
    );
    let p = problem.source.growth_exponent() + 2.0;
    let u = model.synthesize_unchecked(&w.a);
    let lp = model.integrate(&u.iter().map(|x| x.abs().powf(p)).collect::<Vec<_>>());
    a_part + lp.powf(2.0 / p)
}

/// Best constants `(C₁, C₂)` with
/// `d(t) ≤ [q(t−1)⁺/C₁ + d₀^{−q}]^{−1/q} + C₂·l(t)` at every sample, or
/// `None` when no `C₁` on the search grid admits a finite `C₂`.
pub(crate) fn fit_key_inequality(t: &[f64], d: &[f64], l: &[f64], q: f64) -> Option<(f64, f64, f64)> {
    let d0 = d[0];
    if d0 == 0.0 {
        return d.iter().all(|x| *x == 0.0).then_some((1.0, 0.0, 0.0));
    }
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 0..=240 {
        let c1 = 10f64.powf(-4.0 + 12.0 * i as f64 / 240.0);
        let env: Vec<f64> = t
            .iter()
            .map(|&t| (q * (t - 1.0).max(0.0) / c1 + d0.powf(-q)).powf(-1.0 / q))
            .collect();
        let mut c2: f64 = 0.0;
        let mut feasible = true;
        for k in 0..t.len() {
            let gap = d[k] - env[k];
            if gap <= 1e-14 * d0 {
                continue;
            }
            if l[k] <= 0.0 {
                feasible = false;
                break;
            }
            c2 = c2.max(gap / l[k]);
        }
        if !feasible {
            continue;
        }
        let slack: f64 = (0..t.len()).map(|k| env[k] + c2 * l[k] - d[k]).sum();
        if best.is_none_or(|b| slack < b.2) {
            best = Some((c1, c2, slack));
        }
    }
    best
}

/// Distance `d(t) = ‖S(t)U¹ − S(t)U²‖²_𝓗` under a k1 law, fitted to the
/// shape of the key inequality.
pub fn exp_two_trajectory(
    problem: &Problem<'_>,
    u1: &ModalState,
    u2: &ModalState,
    cfg: &IntegratorConfig,
) -> Result<ExperimentReport> {
    let DampingLaw::K1Monomial { q, .. } = problem.damping else {
        return Err(Error::InvalidConfig(
            "exp_two_trajectory needs the k1 monomial law".into(),
        ));
    };
    let (r1, r2) = rayon::join(|| integrate(problem, u1, cfg), || integrate(problem, u2, cfg));
    let (t1, t2) = (r1?, r2?);
    let model = problem.model;
    let mut report = ExperimentReport::new("exp_two_trajectory");
    let omega = problem.constants.omega(model.sigma[0])?;
    record_gradient(&mut report, "first.", &t1, omega);
    record_gradient(&mut report, "second.", &t2, omega);
    let d: Vec<f64> = t1
        .states
        .iter()
        .zip(&t2.states)
        .map(|(x, y)| diff_norm_sq(model, x, y))
        .collect();
    let l: Vec<f64> = t1
        .states
        .iter()
        .zip(&t2.states)
        .map(|(x, y)| lower_order(problem, &x.diff(y)))
        .collect();
    let fit = fit_key_inequality(&t1.times, &d, &l, q);
    match fit {
        Some((c1, c2, _)) => {
            report.constant("C1", c1);
            report.constant("C2", c2);
            report.check("key_inequality_feasible", true, format!("C₁ = {c1:.4e}, C₂ = {c2:.4e}"));
            let rows = (0..d.len())
                .map(|k| {
                    let t = t1.times[k];
                    let env = if d[0] > 0.0 {
                        (q * (t - 1.0).max(0.0) / c1 + d[0].powf(-q)).powf(-1.0 / q)
                    } else {
                        0.0
                    };
                    vec![t, d[k], l[k], env + c2 * l[k]]
                })
                .collect();
            report.tables.push(Table {
                name: "distance".into(),
                header: ["t", "d", "lower_order", "bound"].map(String::from).to_vec(),
                rows,
            });
        }
        None => report.check("key_inequality_feasible", false, "no feasible (C₁, C₂) on the grid"),
    }
    report.constant("d_final", *d.last().unwrap());
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzOptions {
    pub lambdas: Vec<f64>,
    pub lambda0: f64,
    pub t_probe: f64,
}

/// Ratios `‖S_λ(t)U₀ − S_λ₀(t)U₀‖_𝓗/|λ − λ₀|` at `t_probe`.
#[allow(clippy::too_many_arguments)]
pub fn exp_lambda_lipschitz(
    model: &SpectralModel,
    damping: DampingLaw,
    source: SourceLaw,
    h: &[f64],
    initial: &ModalState,
    dt: f64,
    alpha: f64,
    opts: &LipschitzOptions,
) -> Result<ExperimentReport> {
    let base = Forcing::new(opts.lambda0, h.to_vec())?;
    let forcings: Vec<Forcing> = opts
        .lambdas
        .iter()
        .filter(|&&l| l != opts.lambda0)
        .map(|&l| base.with_lambda(l))
        .collect::<Result<_>>()?;
    if forcings.len() < 2 {
        return Err(Error::InvalidConfig("need at least two λ different from λ₀".into()));
    }
    let cfg = IntegratorConfig::strang(dt, opts.t_probe, alpha).with_stride(usize::MAX);
    let run = |f: &Forcing| -> Result<ModalState> {
        let p = Problem::new(model, source, damping, f.clone(), alpha)?;
        Ok(integrate(&p, initial, &cfg)?.last().clone())
    };
    let reference = run(&base)?;
    let ends: Vec<ModalState> = forcings.par_iter().map(run).collect::<Result<_>>()?;
    let mut rows: Vec<(f64, f64, f64)> = forcings
        .iter()
        .zip(&ends)
        .map(|(f, s)| {
            let dist = diff_norm_sq(model, s, &reference).sqrt();
            (f.lambda, dist, dist / (f.lambda - opts.lambda0).abs())
        })
        .collect();
    let mut report = ExperimentReport::new("exp_lambda_lipschitz");
    let finite = rows.iter().all(|r| r.2.is_finite());
    let max_ratio = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    report.constant("max_ratio", max_ratio);
    report.check("ratios_finite", finite, format!("max ratio {max_ratio:.6e}"));
    rows.sort_by(|a, b| (a.0 - opts.lambda0).abs().total_cmp(&(b.0 - opts.lambda0).abs()));
    let (r_a, r_b) = (rows[0].2, rows[1].2);
    let agree = if r_a == 0.0 && r_b == 0.0 {
        true
    } else {
        let (lo, hi) = (r_a.min(r_b), r_a.max(r_b));
        lo > 0.0 && hi / lo <= 2.0
    };
    report.check(
        "local_linearity",
        agree,
        format!("ratios at the two smallest gaps: {r_a:.6e}, {r_b:.6e}"),
    );
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    report.tables.push(Table {
        name: "lipschitz".into(),
        header: ["lambda", "distance", "ratio"].map(String::from).to_vec(),
        rows: rows.iter().map(|r| vec![r.0, r.1, r.2]).collect(),
    });
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionConfig {
    /// Smoothing exponent of `W = D(A₁^{s/4}) × D(A₁^{(s−2)/4})`.
    pub s: f64,
    pub horizon: f64,
    pub dt: f64,
    /// 1-based modes carrying the single-mode initial differences.
    pub probe_modes: Vec<usize>,
    /// Phase-norm size of each probe difference.
    pub probe_size: f64,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        Self {
            s: 1.0,
            horizon: 20.0,
            dt: 1e-3,
            probe_modes: vec![4, 8, 16, 32],
            probe_size: 1e-3,
        }
    }
}

impl DecompositionConfig {
    pub fn validate(&self, model: &SpectralModel) -> Result<()> {
        if !(self.s > 0.0 && self.s < 2.0) {
            return Err(Error::InvalidConfig(format!(
                "smoothing exponent must lie in (0, 2), got {}",
                self.s
            )));
        }
        if !(self.horizon > 0.0 && self.dt > 0.0 && self.probe_size > 0.0) {
            return Err(Error::InvalidConfig("horizon, dt and probe size must be > 0".into()));
        }
        if let Some(j) = self.probe_modes.iter().find(|&&j| j == 0 || j > model.n_modes) {
            return Err(Error::InvalidConfig(format!(
                "probe mode {j} outside 1..={}",
                model.n_modes
            )));
        }
        Ok(())
    }
}

/// `‖U‖²_W = Σ σ_j^{s/2} a_j² + Σ σ_j^{(s−2)/2} b_j²`.
pub fn w_norm_sq(model: &SpectralModel, s: f64, state: &ModalState) -> f64 {
    model
        .sigma
        .iter()
        .zip(state.a.iter().zip(&state.b))
        .map(|(sig, (a, b))| sig.powf(0.5 * s) * a * a + sig.powf(0.5 * (s - 2.0)) * b * b)
        .sum()
}

/// Full solution `u`, linear part `v` (damped, forced, initial `U₀`) and
/// nonlinear part `z` (driven by `−f(u)`, zero initial data), advanced by
/// the same Strang splitting so that `u = v + z` up to rounding.
pub(crate) struct Split {
    pub u: ModalState,
    pub v: ModalState,
    pub z: ModalState,
}

pub(crate) struct SplitRun {
    pub times: Vec<f64>,
    pub samples: Vec<Split>,
    /// `max_t ‖u − (v + z)‖_𝓗` over every step.
    pub worst_split: f64,
}

pub(crate) fn run_split(
    problem: &Problem<'_>,
    initial: &ModalState,
    dt: f64,
    horizon: f64,
    stride: usize,
) -> Result<SplitRun> {
    let DampingLaw::K2Positive {
        gamma,
        kind: K2Kind::Constant,
    } = problem.damping
    else {
        return Err(Error::InvalidConfig("the splitting needs constant damping".into()));
    };
    let model = problem.model;
    let n = model.n_modes;
    let h = problem.forcing.effective();
    let rot = Rotation::new(model, dt);
    let tau = 0.5 * dt;
    let mut u = initial.clone();
    let mut v = initial.clone();
    let mut z = ModalState::zeros(n);
    let mut scratch = vec![0.0; n];
    let mut half = vec![0.0; n];
    let steps = (horizon / dt).round() as usize;
    let mut proj = problem.source.project_unchecked(model, &u.a);
    let mut out = SplitRun {
        times: vec![u.t],
        samples: vec![Split {
            u: u.clone(),
            v: v.clone(),
            z: z.clone(),
        }],
        worst_split: 0.0,
    };
    for i in 1..=steps {
        for sub in 0..2 {
            if sub == 1 {
                rot.apply(&mut u.a, &mut u.b);
                rot.apply(&mut v.a, &mut v.b);
                rot.apply(&mut z.a, &mut z.b);
                proj = problem.source.project_unchecked(model, &u.a);
            }
            kick(tau, &mut u.b, &mut scratch, &mut half, |b, o| {
                for j in 0..n {
                    o[j] = -proj[j] - gamma * b[j] + h[j];
                }
            });
            kick(tau, &mut v.b, &mut scratch, &mut half, |b, o| {
                for j in 0..n {
                    o[j] = -gamma * b[j] + h[j];
                }
            });
            kick(tau, &mut z.b, &mut scratch, &mut half, |b, o| {
                for j in 0..n {
                    o[j] = -proj[j] - gamma * b[j];
                }
            });
        }
        let t = initial.t + i as f64 * dt;
        u.t = t;
        v.t = t;
        z.t = t;
        if !u.is_finite() {
            return Err(Error::BlowUp { t });
        }
        let sum = ModalState {
            a: v.a.iter().zip(&z.a).map(|(x, y)| x + y).collect(),
            b: v.b.iter().zip(&z.b).map(|(x, y)| x + y).collect(),
            t,
        };
        out.worst_split = out.worst_split.max(diff_norm_sq(model, &u, &sum).sqrt());
        if i % stride == 0 || i == steps {
            out.times.push(t);
            out.samples.push(Split {
                u: u.clone(),
                v: v.clone(),
                z: z.clone(),
            });
        }
    }
    Ok(out)
}

/// Checks the splitting identity, the exponential contraction of the
/// linear part and the uniform smoothing of the nonlinear part.
pub fn exp_decomposition(
    problem: &Problem<'_>,
    u1: &ModalState,
    u2: &ModalState,
    dcfg: &DecompositionConfig,
) -> Result<ExperimentReport> {
    let model = problem.model;
    dcfg.validate(model)?;
    let stride = ((0.05 / dcfg.dt).round() as usize).max(1);
    let mut report = ExperimentReport::new("exp_decomposition");

    let (a, b) = rayon::join(
        || run_split(problem, u1, dcfg.dt, dcfg.horizon, stride),
        || run_split(problem, u2, dcfg.dt, dcfg.horizon, stride),
    );
    let (r1, r2) = (a?, b?);
    let worst = r1.worst_split.max(r2.worst_split);
    report.constant("split_error", worst);
    report.check(
        "split_identity",
        worst <= 1e-9,
        format!("max ‖u − (v + z)‖ = {worst:.3e}"),
    );

    let d0 = diff_norm_sq(model, u1, u2).sqrt();
    if d0 > 0.0 {
        let ratio: Vec<f64> = r1
            .samples
            .iter()
            .zip(&r2.samples)
            .map(|(x, y)| diff_norm_sq(model, &x.v, &y.v).sqrt() / d0)
            .collect();
        let series = SampledSeries::new(r1.times.clone(), ratio.clone())?;
        let fit = fit_exp_rate(&series, (0.0, dcfg.horizon))?;
        report.constant("contraction_rate", fit.rate);
        report.check(
            "linear_contraction",
            fit.rate > 0.0,
            format!("fitted rate {:.6}", fit.rate),
        );
        report.tables.push(Table {
            name: "contraction".into(),
            header: ["t", "ratio"].map(String::from).to_vec(),
            rows: r1.times.iter().zip(&ratio).map(|(t, r)| vec![*t, *r]).collect(),
        });
    } else {
        report.check(
            "linear_contraction",
            true,
            "equal initial data, difference identically 0",
        );
    }

    let probes: Vec<(usize, f64, f64)> = dcfg
        .probe_modes
        .par_iter()
        .map(|&j| -> Result<(usize, f64, f64)> {
            let mut p = u1.clone();
            let eps = dcfg.probe_size / model.sigma[j - 1].sqrt();
            p.a[j - 1] += eps;
            let d = p.diff(u1);
            let w = w_norm_sq(model, dcfg.s, &d).sqrt();
            let hn = model.phase_norm_sq(&d).sqrt();
            let run = run_split(problem, &p, dcfg.dt, dcfg.horizon, stride)?;
            let zmax = run
                .samples
                .iter()
                .zip(&r1.samples)
                .map(|(x, y)| diff_norm_sq(model, &x.z, &y.z).sqrt())
                .fold(0.0, f64::max);
            Ok((j, zmax / w, zmax / hn))
        })
        .collect::<Result<_>>()?;
    if !probes.is_empty() {
        let hi = probes.iter().map(|p| p.1).fold(0.0, f64::max);
        let lo = probes.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        report.constant("smoothing_spread", spread);
        // f = 0 leaves z ≡ 0 for every probe
        let ok = hi == 0.0 || spread <= 10.0;
        report.check(
            "uniform_smoothing",
            ok,
            format!(
                "W-normalized ratio max/min = {spread:.4} over modes {:?}",
                dcfg.probe_modes
            ),
        );
        report.tables.push(Table {
            name: "smoothing".into(),
            header: ["mode", "ratio_w", "ratio_h"].map(String::from).to_vec(),
            rows: probes.iter().map(|p| vec![p.0 as f64, p.1, p.2]).collect(),
        });
    }
    // the splitting runs use the same scheme as the plain integrator
    let cfg = IntegratorConfig::strang(dcfg.dt, dcfg.horizon, problem.alpha).with_stride(stride);
    let traj: Trajectory = integrate(problem, u1, &cfg)?;
    let omega = problem.constants.omega(model.sigma[0])?;
    record_gradient(&mut report, "", &traj, omega);
    let drift = traj
        .states
        .iter()
        .zip(&r1.samples)
        .map(|(x, y)| diff_norm_sq(model, x, &y.u).sqrt())
        .fold(0.0, f64::max);
    report.constant("integrator_mismatch", drift);
    Ok(report)
}
