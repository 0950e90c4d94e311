//! Stationary states `κAu + A₁u + f(u) = λh` as critical points of
//!
//! ```text
//! I(u) = ½‖A₁^{1/2}u‖² + (κ/2)‖A^{1/2}u‖² + ∫f̂(u) − (λh, u)
//! ```
//!
//! found by preconditioned Armijo descent followed by a Newton–CG polish.

use crate::error::{check_len, Error, Result};
use crate::laws::{AssumptionConstants, Forcing, SourceLaw};
use crate::spectral::{ModalState, SpectralModel};
use rayon::prelude::*;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Phase-norm distance below which two stationary points are the same.
pub const DEDUP_DISTANCE: f64 = 1e-4;

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryResult {
    pub coeffs: Vec<f64>,
    pub functional_value: f64,
    /// Euclidean norm of the modal residual, i.e. of [`el_gradient`].
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn stiffness(model: &SpectralModel) -> Vec<f64> {
    model
        .sigma
        .iter()
        .zip(&model.mu)
        .map(|(s, m)| s + model.kappa * m)
        .collect()
}

fn check_inputs(model: &SpectralModel, forcing: &Forcing, coeffs: &[f64]) -> Result<()> {
    check_len(model.n_modes, coeffs.len())?;
    check_len(model.n_modes, forcing.h.len())
}

pub fn euler_lagrange_value(
    model: &SpectralModel,
    source: &SourceLaw,
    forcing: &Forcing,
    coeffs: &[f64],
) -> Result<f64> {
    check_inputs(model, forcing, coeffs)?;
    Ok(value(model, &stiffness(model), source, &forcing.effective(), coeffs))
}

pub fn el_gradient(model: &SpectralModel, source: &SourceLaw, forcing: &Forcing, coeffs: &[f64]) -> Result<Vec<f64>> {
    check_inputs(model, forcing, coeffs)?;
    Ok(gradient(model, &stiffness(model), source, &forcing.effective(), coeffs))
}

fn value(model: &SpectralModel, k: &[f64], source: &SourceLaw, h: &[f64], c: &[f64]) -> f64 {
    let quad: f64 = k.iter().zip(c).map(|(k, c)| k * c * c).sum();
    let work: f64 = h.iter().zip(c).map(|(h, c)| h * c).sum();
    0.5 * quad + source.potential(model, c) - work
}

fn gradient(model: &SpectralModel, k: &[f64], source: &SourceLaw, h: &[f64], c: &[f64]) -> Vec<f64> {
    let mut g = source.project_unchecked(model, c);
    for j in 0..c.len() {
        g[j] += k[j] * c[j] - h[j];
    }
    g
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn axpy(c: &[f64], s: f64, d: &[f64]) -> Vec<f64> {
    c.iter().zip(d).map(|(c, d)| c + s * d).collect()
}

struct Solver<'a> {
    model: &'a SpectralModel,
    source: &'a SourceLaw,
    k: Vec<f64>,
    h: Vec<f64>,
}

impl Solver<'_> {
    fn value(&self, c: &[f64]) -> f64 {
        value(self.model, &self.k, self.source, &self.h, c)
    }

    fn gradient(&self, c: &[f64]) -> Vec<f64> {
        gradient(self.model, &self.k, self.source, &self.h, c)
    }

    /// Central-difference Hessian–vector product.
    fn hvp(&self, c: &[f64], v: &[f64]) -> Vec<f64> {
        let nv = norm(v);
        if nv == 0.0 {
            return vec![0.0; v.len()];
        }
        let eps = 1e-6 * (1.0 + norm(c)) / nv;
        let gp = self.gradient(&axpy(c, eps, v));
        let gm = self.gradient(&axpy(c, -eps, v));
        gp.iter().zip(&gm).map(|(p, m)| (p - m) / (2.0 * eps)).collect()
    }

    /// Jacobi-preconditioned CG for `H p = −g`, stopping at negative curvature.
    fn newton_direction(&self, c: &[f64], g: &[f64]) -> Vec<f64> {
        let n = c.len();
        let mut p = vec![0.0; n];
        let mut r: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut z: Vec<f64> = r.iter().zip(&self.k).map(|(r, k)| r / k).collect();
        let mut d = z.clone();
        let mut rz = dot(&r, &z);
        let target = 1e-10 * norm(g);
        for _ in 0..(4 * n).max(20) {
            let hd = self.hvp(c, &d);
            let curv = dot(&d, &hd);
            if curv <= 0.0 {
                break;
            }
            let step = rz / curv;
            for i in 0..n {
                p[i] += step * d[i];
                r[i] -= step * hd[i];
            }
            if norm(&r) <= target {
                break;
            }
            z = r.iter().zip(&self.k).map(|(r, k)| r / k).collect();
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                d[i] = z[i] + beta * d[i];
            }
        }
        if dot(&p, g) < 0.0 {
            p
        } else {
            g.iter().zip(&self.k).map(|(g, k)| -g / k).collect()
        }
    }
}

/// Descent trace kept for tests: functional values at accepted iterates.
pub(crate) struct Trace {
    pub values: Vec<f64>,
}

pub fn minimize_functional(
    model: &SpectralModel,
    source: &SourceLaw,
    forcing: &Forcing,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<StationaryResult> {
    minimize_traced(model, source, forcing, start, tol, max_iter).map(|(r, _)| r)
}

pub(crate) fn minimize_traced(
    model: &SpectralModel,
    source: &SourceLaw,
    forcing: &Forcing,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(StationaryResult, Trace)> {
    check_inputs(model, forcing, start)?;
    // also rejects r ≥ δ, where I is not coercive
    source.validate()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be > 0, got {tol}")));
    }
    let solver = Solver {
        model,
        source,
        k: stiffness(model),
        h: forcing.effective(),
    };
    let mut c = start.to_vec();
    let mut val = solver.value(&c);
    let mut g = solver.gradient(&c);
    let mut gn = norm(&g);
    let mut trace = Trace { values: vec![val] };
    let mut iterations = 0;
    let coarse = tol.sqrt();
    let mut first_step = 1.0f64;

    // descent in the metric of the quadratic part, since plain gradient
    // steps would be limited by the stiffest mode σ_N; a Barzilai–Borwein
    // trial step is backtracked to the Armijo condition
    while gn > coarse && iterations < max_iter {
        iterations += 1;
        let d: Vec<f64> = g.iter().zip(&solver.k).map(|(g, k)| -g / k).collect();
        let slope = dot(&g, &d);
        let mut s = first_step;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let trial = axpy(&c, s, &d);
            let tv = solver.value(&trial);
            if tv <= val + ARMIJO * s * slope {
                accepted = Some((trial, tv));
                break;
            }
            s *= 0.5;
        }
        let Some((trial, tv)) = accepted else { break };
        let g_new = solver.gradient(&trial);
        let dc: Vec<f64> = trial.iter().zip(&c).map(|(x, y)| x - y).collect();
        let dg: Vec<f64> = g_new.iter().zip(&g).map(|(x, y)| x - y).collect();
        let kdc: f64 = dc.iter().zip(&solver.k).map(|(d, k)| k * d * d).sum();
        let curv = dot(&dc, &dg);
        first_step = if curv > 0.0 { (kdc / curv).clamp(1e-6, 1e3) } else { 1.0 };
        c = trial;
        val = tv;
        g = g_new;
        gn = norm(&g);
        trace.values.push(val);
    }

    while gn > tol && iterations < max_iter {
        iterations += 1;
        let p = solver.newton_direction(&c, &g);
        let slope = dot(&g, &p);
        let mut s = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let trial = axpy(&c, s, &p);
            let tv = solver.value(&trial);
            if tv <= val + ARMIJO * s * slope {
                accepted = Some((trial, tv));
                break;
            }
            // near the minimum the decrease drowns in rounding of I; accept a
            // step that shrinks the gradient without raising I measurably
            if tv <= val + 1e-14 * val.abs().max(1.0) {
                let tg = solver.gradient(&trial);
                if norm(&tg) < gn {
                    accepted = Some((trial, tv));
                    break;
                }
            }
            s *= 0.5;
        }
        let Some((trial, tv)) = accepted else { break };
        c = trial;
        val = tv.min(val);
        g = solver.gradient(&c);
        gn = norm(&g);
        trace.values.push(tv);
    }

    let result = StationaryResult {
        functional_value: solver.value(&c),
        coeffs: c,
        residual: gn,
        iterations,
        converged: gn <= tol,
    };
    Ok((result, trace))
}

fn phase_distance(model: &SpectralModel, x: &[f64], y: &[f64]) -> f64 {
    model
        .sigma
        .iter()
        .zip(x.iter().zip(y))
        .map(|(s, (a, b))| s * (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Independent solves from every start; converged results are
/// de-duplicated at [`DEDUP_DISTANCE`] in phase norm and sorted by value.
pub fn multi_start(
    model: &SpectralModel,
    source: &SourceLaw,
    forcing: &Forcing,
    starts: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<StationaryResult>> {
    let results: Vec<StationaryResult> = starts
        .par_iter()
        .map(|s| minimize_functional(model, source, forcing, s, tol, max_iter))
        .collect::<Result<_>>()?;
    let mut distinct: Vec<StationaryResult> = Vec::new();
    for r in results.into_iter().filter(|r| r.converged) {
        if distinct
            .iter()
            .all(|d| phase_distance(model, &d.coeffs, &r.coeffs) > DEDUP_DISTANCE)
        {
            distinct.push(r);
        }
    }
    distinct.sort_by(|a, b| a.functional_value.total_cmp(&b.functional_value));
    Ok(distinct)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryBound {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `(ω/2)‖A₁^{1/2}u‖² + κ‖A^{1/2}u‖² ≤ C_f|Ω| + 2‖h_λ‖²/(σ₁ω)`.
pub fn stationary_bound_check(
    model: &SpectralModel,
    constants: &AssumptionConstants,
    forcing: &Forcing,
    result: &StationaryResult,
) -> Result<StationaryBound> {
    if !result.converged {
        return Err(Error::Domain(
            "bound applies to converged stationary points only".into(),
        ));
    }
    check_inputs(model, forcing, &result.coeffs)?;
    let sigma1 = model.sigma[0];
    let omega = constants.omega(sigma1)?;
    let state = ModalState {
        a: result.coeffs.clone(),
        b: vec![0.0; model.n_modes],
        t: 0.0,
    };
    let bend = model.phase_norm_sq(&state);
    let memb: f64 = model.mu.iter().zip(&result.coeffs).map(|(m, c)| m * c * c).sum();
    let lhs = 0.5 * omega * bend + model.kappa * memb;
    let rhs = constants.c_big_f * model.length + 2.0 * forcing.norm_sq() / (sigma1 * omega);
    Ok(StationaryBound {
        lhs,
        rhs,
        ok: lhs <= rhs + 1e-9,
    })
}
