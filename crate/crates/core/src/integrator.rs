//! Time stepping of the Galerkin system
//!
//! ```text
//! a_j'' + ω_j² a_j + ⟨f(u), w_j⟩ + k(𝓔_α(a, b)) b_j = λh_j,   ω_j² = σ_j + κμ_j
//! ```
//!
//! `SplitStrang` treats the stiff linear part by exact per-mode rotation and
//! the nonlinear remainder by two half kicks; `Rk4` is the classical
//! four-stage method on the full first-order system and is only stable for
//! `dt·ω_max ≤ 2.8`.

use crate::error::{Error, Result};
use crate::functionals::{e_alpha_parts, energy_with_offset, k_lambda};
use crate::laws::{assumption_constants, AssumptionConstants, DampingLaw, Forcing, SourceLaw};
use crate::spectral::{ModalState, SpectralModel};

/// Stability ceiling for RK4 on the undamped oscillator.
pub const RK4_STABILITY_LIMIT: f64 = 2.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    SplitStrang,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub alpha: f64,
    pub sample_stride: usize,
    pub horizon: f64,
}

impl IntegratorConfig {
    pub fn strang(dt: f64, horizon: f64, alpha: f64) -> Self {
        Self {
            dt,
            scheme: Scheme::SplitStrang,
            alpha,
            sample_stride: 1,
            horizon,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride;
        self
    }

    pub fn validate(&self, model: &SpectralModel) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidConfig(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "horizon must be > 0, got {}",
                self.horizon
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidConfig("sample_stride must be ≥ 1".into()));
        }
        if self.scheme == Scheme::Rk4 {
            let w_max = model.frequencies().last().copied().unwrap_or(0.0);
            if self.dt * w_max > RK4_STABILITY_LIMIT {
                return Err(Error::InvalidConfig(format!(
                    "RK4 requires dt·ω_max ≤ {RK4_STABILITY_LIMIT}, got {:.4}",
                    self.dt * w_max
                )));
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// The full right-hand side: model, closures and the damping exponent.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub model: &'a SpectralModel,
    pub source: SourceLaw,
    pub damping: DampingLaw,
    pub forcing: Forcing,
    pub constants: AssumptionConstants,
    pub alpha: f64,
    h_eff: Vec<f64>,
}

/// Half-width of the sampled range for the source constants.
pub const DEFAULT_CONSTANT_RANGE: f64 = 100.0;
const DEFAULT_CONSTANT_SAMPLES: usize = 200_001;

impl<'a> Problem<'a> {
    pub fn new(
        model: &'a SpectralModel,
        source: SourceLaw,
        damping: DampingLaw,
        forcing: Forcing,
        alpha: f64,
    ) -> Result<Self> {
        source.validate()?;
        damping.validate()?;
        crate::error::check_len(model.n_modes, forcing.h.len())?;
        let constants = assumption_constants(&source, DEFAULT_CONSTANT_RANGE, DEFAULT_CONSTANT_SAMPLES)?;
        let h_eff = forcing.effective();
        Ok(Self {
            model,
            source,
            damping,
            forcing,
            constants,
            alpha,
            h_eff,
        })
    }

    pub fn homogeneous(model: &'a SpectralModel, damping: DampingLaw, alpha: f64) -> Result<Self> {
        Self::new(model, SourceLaw::Zero, damping, Forcing::zero(model.n_modes), alpha)
    }

    pub fn k_lambda(&self) -> Result<f64> {
        k_lambda(self.model, &self.constants, &self.forcing)
    }

    #[inline]
    fn damping_coefficient(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.damping {
            DampingLaw::Undamped => 0.0,
            DampingLaw::K2Positive {
                gamma,
                kind: crate::laws::K2Kind::Constant,
            } => gamma,
            law => law.eval_unchecked(e_alpha_parts(&self.model.mu, self.alpha, a, b)),
        }
    }

    /// Instantaneous dissipation rate `k(𝓔_α)‖b‖²`.
    pub fn dissipation_rate(&self, state: &ModalState) -> f64 {
        let k = self.damping_coefficient(&state.a, &state.b);
        if k == 0.0 {
            return 0.0;
        }
        k * state.b.iter().map(|x| x * x).sum::<f64>()
    }

    /// Nonlinear acceleration `−⟨f(u),w⟩ − k b + h_λ` given a projected source.
    fn nonlinear_accel(&self, source_proj: &[f64], a: &[f64], b: &[f64], out: &mut [f64]) {
        let k = self.damping_coefficient(a, b);
        for j in 0..out.len() {
            out[j] = -source_proj[j] - k * b[j] + self.h_eff[j];
        }
    }

    fn project(&self, a: &[f64]) -> Vec<f64> {
        self.source.project_unchecked(self.model, a)
    }
}

/// Exact flow of `a'' + ω²a = 0` over a fixed step.
#[derive(Debug, Clone)]
pub struct Rotation {
    omega: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Rotation {
    pub fn new(model: &SpectralModel, dt: f64) -> Self {
        let omega = model.frequencies();
        let mut cos = Vec::with_capacity(omega.len());
        let mut sin = Vec::with_capacity(omega.len());
        for w in &omega {
            let (s, c) = (w * dt).sin_cos();
            // unit determinant up to one rounding
            let r = s.hypot(c);
            cos.push(c / r);
            sin.push(s / r);
        }
        Self { omega, cos, sin }
    }

    pub fn apply(&self, a: &mut [f64], b: &mut [f64]) {
        for j in 0..a.len() {
            let (c, s, w) = (self.cos[j], self.sin[j], self.omega[j]);
            let (x, v) = (w * a[j], b[j]);
            a[j] = (c * x + s * v) / w;
            b[j] = c * v - s * x;
        }
    }
}

/// Half kick `b ← b + τ·g(a, b*)` with `b* = b + (τ/2)g(a, b)`.
pub(crate) fn kick<F>(tau: f64, b: &mut [f64], scratch: &mut [f64], half: &mut [f64], mut accel: F)
where
    F: FnMut(&[f64], &mut [f64]),
{
    accel(b, scratch);
    for j in 0..b.len() {
        half[j] = b[j] + 0.5 * tau * scratch[j];
    }
    accel(half, scratch);
    for j in 0..b.len() {
        b[j] += tau * scratch[j];
    }
}

/// Stepper state carrying the cached source projection between steps.
pub struct Stepper<'p, 'a> {
    problem: &'p Problem<'a>,
    cfg: IntegratorConfig,
    rotation: Rotation,
    source_proj: Option<Vec<f64>>,
    scratch: Vec<f64>,
    half: Vec<f64>,
}

impl<'p, 'a> Stepper<'p, 'a> {
    pub fn new(problem: &'p Problem<'a>, cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate(problem.model)?;
        let n = problem.model.n_modes;
        Ok(Self {
            problem,
            cfg,
            rotation: Rotation::new(problem.model, cfg.dt),
            source_proj: None,
            scratch: vec![0.0; n],
            half: vec![0.0; n],
        })
    }

    pub fn step(&mut self, state: &mut ModalState) -> Result<()> {
        match self.cfg.scheme {
            Scheme::SplitStrang => self.strang(state),
            Scheme::Rk4 => self.rk4(state),
        }
        state.t += self.cfg.dt;
        if !state.is_finite() {
            return Err(Error::BlowUp { t: state.t });
        }
        Ok(())
    }

    fn strang(&mut self, state: &mut ModalState) {
        let p = self.problem;
        let tau = 0.5 * self.cfg.dt;
        let proj = match self.source_proj.take() {
            Some(v) => v,
            None => p.project(&state.a),
        };
        let a = &state.a;
        kick(tau, &mut state.b, &mut self.scratch, &mut self.half, |b, out| {
            p.nonlinear_accel(&proj, a, b, out)
        });
        self.rotation.apply(&mut state.a, &mut state.b);
        let proj = p.project(&state.a);
        let a = &state.a;
        kick(tau, &mut state.b, &mut self.scratch, &mut self.half, |b, out| {
            p.nonlinear_accel(&proj, a, b, out)
        });
        self.source_proj = Some(proj);
    }

    fn rk4(&mut self, state: &mut ModalState) {
        let p = self.problem;
        let dt = self.cfg.dt;
        let n = state.a.len();
        let w2: Vec<f64> = self.rotation.omega.iter().map(|w| w * w).collect();
        let rhs = |a: &[f64], b: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let proj = p.project(a);
            let mut acc = vec![0.0; n];
            p.nonlinear_accel(&proj, a, b, &mut acc);
            for j in 0..n {
                acc[j] -= w2[j] * a[j];
            }
            (b.to_vec(), acc)
        };
        let axpy = |x: &[f64], k: &[f64], h: f64| -> Vec<f64> { x.iter().zip(k).map(|(x, k)| x + h * k).collect() };
        let (k1a, k1b) = rhs(&state.a, &state.b);
        let (k2a, k2b) = rhs(&axpy(&state.a, &k1a, dt / 2.0), &axpy(&state.b, &k1b, dt / 2.0));
        let (k3a, k3b) = rhs(&axpy(&state.a, &k2a, dt / 2.0), &axpy(&state.b, &k2b, dt / 2.0));
        let (k4a, k4b) = rhs(&axpy(&state.a, &k3a, dt), &axpy(&state.b, &k3b, dt));
        for j in 0..n {
            state.a[j] += dt / 6.0 * (k1a[j] + 2.0 * k2a[j] + 2.0 * k3a[j] + k4a[j]);
            state.b[j] += dt / 6.0 * (k1b[j] + 2.0 * k2b[j] + 2.0 * k3b[j] + k4b[j]);
        }
    }
}

/// One step of the configured scheme.
pub fn step(problem: &Problem<'_>, state: &ModalState, cfg: &IntegratorConfig) -> Result<ModalState> {
    problem.model.check_state(state)?;
    let mut s = state.clone();
    Stepper::new(problem, *cfg)?.step(&mut s)?;
    Ok(s)
}

/// Sampled solution with energy bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ModalState>,
    pub energy: Vec<f64>,
    pub modified: Vec<f64>,
    /// `∫₀ᵗ k(𝓔_α)‖u_t‖²`, trapezoid-accumulated at every step.
    pub dissipation: Vec<f64>,
    pub phase_norm: Vec<f64>,
    pub k_lambda: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &ModalState {
        self.states.last().expect("trajectory has at least the initial sample")
    }
}

pub fn integrate(problem: &Problem<'_>, initial: &ModalState, cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate_observed(problem, initial, cfg, |_| {})
}

/// As [`integrate`], calling `observe` on the state after every step.
pub fn integrate_observed<F>(
    problem: &Problem<'_>,
    initial: &ModalState,
    cfg: &IntegratorConfig,
    mut observe: F,
) -> Result<Trajectory>
where
    F: FnMut(&ModalState),
{
    problem.model.check_state(initial)?;
    let mut stepper = Stepper::new(problem, *cfg)?;
    let k_lambda = problem.k_lambda()?;
    let n_steps = cfg.n_steps();
    let cap = n_steps / cfg.sample_stride + 2;
    let mut traj = Trajectory {
        times: Vec::with_capacity(cap),
        states: Vec::with_capacity(cap),
        energy: Vec::with_capacity(cap),
        modified: Vec::with_capacity(cap),
        dissipation: Vec::with_capacity(cap),
        phase_norm: Vec::with_capacity(cap),
        k_lambda,
    };
    let record = |traj: &mut Trajectory, s: &ModalState, d: f64| {
        let e = energy_with_offset(problem.model, &problem.source, &problem.forcing, k_lambda, cfg.alpha, s);
        traj.times.push(s.t);
        traj.states.push(s.clone());
        traj.energy.push(e.total);
        traj.modified.push(e.modified);
        traj.dissipation.push(d);
        traj.phase_norm.push(problem.model.phase_norm_sq(s).sqrt());
    };
    let mut state = initial.clone();
    let t0 = state.t;
    let mut d = 0.0;
    let mut rate = problem.dissipation_rate(&state);
    record(&mut traj, &state, d);
    for i in 1..=n_steps {
        stepper.step(&mut state)?;
        // fixed grid avoids drift from repeated addition
        state.t = t0 + i as f64 * cfg.dt;
        let next = problem.dissipation_rate(&state);
        d += 0.5 * cfg.dt * (rate + next);
        rate = next;
        observe(&state);
        if i % cfg.sample_stride == 0 || i == n_steps {
            record(&mut traj, &state, d);
        }
    }
    Ok(traj)
}

/// `max_i |E(t_i) + D(t_i) − E(t₀)| / max(|E(t₀)|, 1)`.
pub fn energy_identity_residual(traj: &Trajectory) -> f64 {
    let Some(&e0) = traj.energy.first() else {
        return 0.0;
    };
    let scale = e0.abs().max(1.0);
    traj.energy
        .iter()
        .zip(&traj.dissipation)
        .map(|(e, d)| (e + d - e0).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Outcome of a step-size refinement study.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderEstimate {
    /// Fitted order from successive differences.
    Order(f64),
    /// Differences at rounding level for every step size.
    Exact,
    /// Differences did not shrink monotonically.
    NonMonotone { differences: Vec<f64> },
}

/// Empirical order from runs at geometrically refined step sizes.
///
/// With `x_i` the final state at `dt_i`, the successive differences
/// `d_i = ‖x_i − x_{i+1}‖` shrink like `r^p` for refinement ratio `r`.
pub fn convergence_order(
    problem: &Problem<'_>,
    initial: &ModalState,
    base: &IntegratorConfig,
    dt_list: &[f64],
) -> Result<OrderEstimate> {
    if dt_list.len() < 3 {
        return Err(Error::Domain("need at least three step sizes".into()));
    }
    let ratio = dt_list[0] / dt_list[1];
    for w in dt_list.windows(2) {
        let r = w[0] / w[1];
        if !(r > 1.0) || (r - ratio).abs() > 1e-9 * ratio {
            return Err(Error::Domain(
                "step sizes must decrease in geometric progression".into(),
            ));
        }
    }
    let mut finals = Vec::with_capacity(dt_list.len());
    for &dt in dt_list {
        let cfg = IntegratorConfig {
            dt,
            sample_stride: usize::MAX,
            ..*base
        };
        let mut s = initial.clone();
        let mut stepper = Stepper::new(problem, cfg)?;
        for _ in 0..cfg.n_steps() {
            stepper.step(&mut s)?;
        }
        finals.push(problem.model.phase_coordinates(&s));
    }
    let scale = finals
        .last()
        .map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt())
        .unwrap_or(1.0)
        .max(1.0);
    let diffs: Vec<f64> = finals
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
        .collect();
    if diffs.iter().all(|&d| d <= 1e-12 * scale) {
        return Ok(OrderEstimate::Exact);
    }
    if diffs.windows(2).any(|w| !(w[1] < w[0])) {
        return Ok(OrderEstimate::NonMonotone { differences: diffs });
    }
    let orders: Vec<f64> = diffs.windows(2).map(|w| (w[0] / w[1]).ln() / ratio.ln()).collect();
    Ok(OrderEstimate::Order(orders.iter().sum::<f64>() / orders.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{K3Kind, SourceLaw};
    use std::f64::consts::PI;

    fn pi_model(n: usize) -> SpectralModel {
        SpectralModel::with_default_grid(n, PI, 0.0).unwrap()
    }

    #[test]
    fn harmonic_oscillator_step() {
        let m = pi_model(1);
        let p = Problem::homogeneous(&m, DampingLaw::Undamped, 0.5).unwrap();
        let s0 = ModalState::new(vec![1.0], vec![0.0]).unwrap();
        let cfg = IntegratorConfig::strang(0.1, 0.1, 0.5);
        let s1 = step(&p, &s0, &cfg).unwrap();
        assert!((s1.a[0] - 0.1f64.cos()).abs() < 1e-15);
        assert!((s1.b[0] + 0.1f64.sin()).abs() < 1e-15);
        assert!((s1.a[0] - 0.995_004_2).abs() < 1e-7);
    }

    #[test]
    fn linear_flow_conserves_phase_norm() {
        let m = pi_model(4);
        let p = Problem::homogeneous(&m, DampingLaw::Undamped, 0.5).unwrap();
        let mut s = ModalState::new(vec![0.3, -0.1, 0.02, 0.01], vec![0.1, 0.2, -0.3, 0.05]).unwrap();
        let n0 = m.phase_norm(&s).unwrap();
        let mut st = Stepper::new(&p, IntegratorConfig::strang(1e-2, 1e4, 0.5)).unwrap();
        for _ in 0..1_000_000 {
            st.step(&mut s).unwrap();
        }
        let n1 = m.phase_norm(&s).unwrap();
        // one rounding per step at most
        assert!((n1 - n0).abs() < 1e6 * f64::EPSILON * n0, "{n0} {n1}");
    }

    #[test]
    fn rotation_reverses() {
        let m = SpectralModel::with_default_grid(8, PI, 0.3).unwrap();
        let fwd = Rotation::new(&m, 0.037);
        let back = Rotation::new(&m, -0.037);
        let a0: Vec<f64> = (0..8).map(|j| 0.1 * j as f64 - 0.3).collect();
        let b0: Vec<f64> = (0..8).map(|j| 0.05 * (j as f64).sin()).collect();
        let (mut a, mut b) = (a0.clone(), b0.clone());
        fwd.apply(&mut a, &mut b);
        back.apply(&mut a, &mut b);
        for j in 0..8 {
            assert!((a[j] - a0[j]).abs() < 1e-13);
            assert!((b[j] - b0[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn strang_stable_far_beyond_explicit_limit() {
        let m = pi_model(32);
        let p = Problem::homogeneous(&m, DampingLaw::Undamped, 0.5).unwrap();
        let mut s = ModalState::zeros(32);
        s.a[31] = 1e-3;
        s.b[0] = 1.0;
        let n0 = m.phase_norm(&s).unwrap();
        // dt·ω_max = 0.5·1024
        let mut st = Stepper::new(&p, IntegratorConfig::strang(0.5, 100.0, 0.5)).unwrap();
        for _ in 0..200 {
            st.step(&mut s).unwrap();
        }
        assert!((m.phase_norm(&s).unwrap() - n0).abs() < 1e-12);
        let rk = IntegratorConfig {
            scheme: Scheme::Rk4,
            ..IntegratorConfig::strang(0.5, 100.0, 0.5)
        };
        assert!(matches!(Stepper::new(&p, rk), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn single_step_matches_fine_reference() {
        // local error of one Strang step against 10⁴ RK4 substeps is O(dt³)
        let m = pi_model(1);
        let p = Problem::homogeneous(&m, DampingLaw::K1Monomial { gamma: 1.0, q: 1.0 }, 0.5).unwrap();
        let s0 = ModalState::new(vec![0.8], vec![0.6]).unwrap();
        let mut errs = Vec::new();
        for dt in [0.04, 0.02, 0.01] {
            let one = step(&p, &s0, &IntegratorConfig::strang(dt, dt, 0.5)).unwrap();
            let fine_cfg = IntegratorConfig {
                scheme: Scheme::Rk4,
                ..IntegratorConfig::strang(dt / 1e4, dt, 0.5)
            };
            let mut r = s0.clone();
            let mut st = Stepper::new(&p, fine_cfg).unwrap();
            for _ in 0..10_000 {
                st.step(&mut r).unwrap();
            }
            errs.push(((one.a[0] - r.a[0]).powi(2) + (one.b[0] - r.b[0]).powi(2)).sqrt());
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 2.7 && order < 3.3, "local order {order}");
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let m = pi_model(6);
        let p = Problem::new(
            &m,
            SourceLaw::cubic(),
            DampingLaw::K1Monomial { gamma: 1.0, q: 1.0 },
            Forcing::zero(6),
            0.5,
        )
        .unwrap();
        let traj = integrate(&p, &ModalState::zeros(6), &IntegratorConfig::strang(1e-2, 1.0, 0.5)).unwrap();
        assert!(traj.states.iter().all(|s| s.a.iter().chain(&s.b).all(|&v| v == 0.0)));
        assert!(traj.energy.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn undamped_single_mode_is_cosine() {
        let m = pi_model(1);
        let p = Problem::homogeneous(&m, DampingLaw::Undamped, 0.5).unwrap();
        let s0 = ModalState::new(vec![0.7], vec![0.0]).unwrap();
        let traj = integrate(&p, &s0, &IntegratorConfig::strang(1e-3, 10.0, 0.5).with_stride(100)).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((s.a[0] - 0.7 * t.cos()).abs() < 1e-10);
        }
        assert!(energy_identity_residual(&traj) <= 1e-12);
    }

    #[test]
    fn k1_modified_energy_non_increasing() {
        let m = pi_model(8);
        let p = Problem::homogeneous(&m, DampingLaw::K1Monomial { gamma: 1.0, q: 1.0 }, 0.5).unwrap();
        let mut s0 = ModalState::zeros(8);
        s0.a[0] = 0.8;
        s0.b[1] = 0.5;
        s0.a[4] = 0.01;
        let traj = integrate(&p, &s0, &IntegratorConfig::strang(1e-3, 5.0, 0.5)).unwrap();
        assert!(traj.modified.windows(2).all(|w| w[1] <= w[0]));
        assert!(traj.dissipation.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn k1_energy_identity_converges_second_order() {
        let m = pi_model(4);
        let p = Problem::homogeneous(&m, DampingLaw::K1Monomial { gamma: 1.0, q: 1.0 }, 0.5).unwrap();
        let s0 = ModalState::new(vec![0.6, 0.1, 0.0, 0.02], vec![0.3, -0.2, 0.1, 0.0]).unwrap();
        let r1 = energy_identity_residual(&integrate(&p, &s0, &IntegratorConfig::strang(1e-3, 10.0, 0.5)).unwrap());
        let r2 = energy_identity_residual(&integrate(&p, &s0, &IntegratorConfig::strang(5e-4, 10.0, 0.5)).unwrap());
        assert!(r1 <= 1e-5, "{r1}");
        let ratio = r1 / r2;
        assert!((ratio - 4.0).abs() <= 1.0, "ratio {ratio}");
    }

    #[test]
    fn k3_inside_ball_conserves_exactly() {
        let m = pi_model(4);
        let law = DampingLaw::K3Threshold {
            gamma: 1.0,
            kind: K3Kind::Rational,
        };
        let p = Problem::homogeneous(&m, law, 1.0).unwrap();
        let s0 = ModalState::new(vec![0.5, 0.0, 0.0, 0.0], vec![0.0; 4]).unwrap();
        let traj = integrate(&p, &s0, &IntegratorConfig::strang(1e-3, 20.0, 1.0).with_stride(10)).unwrap();
        assert!(energy_identity_residual(&traj) <= 1e-12);
        assert!(traj.dissipation.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn order_sentinel_for_linear_flow() {
        let m = pi_model(4);
        let p = Problem::homogeneous(&m, DampingLaw::Undamped, 0.5).unwrap();
        let s0 = ModalState::new(vec![0.3, 0.1, 0.0, 0.0], vec![0.0, 0.2, 0.1, 0.0]).unwrap();
        let est = convergence_order(&p, &s0, &IntegratorConfig::strang(0.1, 2.0, 0.5), &[0.1, 0.05, 0.025]).unwrap();
        assert_eq!(est, OrderEstimate::Exact);
    }

    #[test]
    fn strang_is_second_order() {
        let m = pi_model(4);
        let p = Problem::new(
            &m,
            SourceLaw::cubic(),
            DampingLaw::K1Monomial { gamma: 1.0, q: 1.0 },
            Forcing::zero(4),
            0.5,
        )
        .unwrap();
        let s0 = ModalState::new(vec![0.8, 0.1, 0.05, 0.0], vec![0.2, -0.3, 0.0, 0.05]).unwrap();
        let dts = [0.02, 0.01, 0.005, 0.0025];
        match convergence_order(&p, &s0, &IntegratorConfig::strang(0.02, 2.0, 0.5), &dts).unwrap() {
            OrderEstimate::Order(o) => assert!((o - 2.0).abs() <= 0.3, "order {o}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        // mildly stiff: ω_max = 16
        let m = pi_model(4);
        let p = Problem::new(
            &m,
            SourceLaw::cubic(),
            DampingLaw::K1Monomial { gamma: 1.0, q: 1.0 },
            Forcing::zero(4),
            0.5,
        )
        .unwrap();
        let s0 = ModalState::new(vec![0.8, 0.1, 0.05, 0.0], vec![0.2, -0.3, 0.0, 0.05]).unwrap();
        let base = IntegratorConfig {
            scheme: Scheme::Rk4,
            ..IntegratorConfig::strang(0.02, 2.0, 0.5)
        };
        match convergence_order(&p, &s0, &base, &[0.02, 0.01, 0.005, 0.0025]).unwrap() {
            OrderEstimate::Order(o) => assert!((o - 4.0).abs() <= 0.5, "order {o}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn order_rejects_bad_lists() {
        let m = pi_model(2);
        let p = Problem::homogeneous(&m, DampingLaw::Undamped, 0.5).unwrap();
        let s0 = ModalState::zeros(2);
        let cfg = IntegratorConfig::strang(0.1, 1.0, 0.5);
        assert!(convergence_order(&p, &s0, &cfg, &[0.1, 0.05]).is_err());
        assert!(convergence_order(&p, &s0, &cfg, &[0.1, 0.05, 0.02]).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let m = pi_model(1);
        let p = Problem::homogeneous(&m, DampingLaw::Undamped, 0.5).unwrap();
        let s0 = ModalState::new(vec![f64::NAN], vec![0.0]).unwrap();
        let err = step(&p, &s0, &IntegratorConfig::strang(0.1, 0.1, 0.5)).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }));
    }
}
