//! Grid versions of the generalized Nakao difference inequality and the
//! power-difference (Haraux-type) estimate, with randomized suites.
//!
//! Nakao: if `φ ≥ 0` satisfies
//!
//! ```text
//! sup_{t ≤ s ≤ t+1} φ(s)^{1+ρ} ≤ C₀(φ(t) − φ(t+1)) + K(t)
//! ```
//!
//! with `K` non-negative and non-decreasing, then for `ρ > 0`
//! `φ(t) ≤ (C₀⁻¹ρ(t−1)⁺ + (sup_{[0,1]} φ)^{−ρ})^{−1/ρ} + K(t)^{1/(1+ρ)}` and for
//! `ρ = 0` `φ(t) ≤ sup_{[0,1]} φ · (C₀/(1+C₀))^{[t]} + K(t)`.
//!
//! Suprema are taken over grid points; the grid spacing must divide 1 so
//! that every window `[t, t+1]` starts and ends on the grid.

use crate::error::{Error, Result};
use crate::functionals::SampledSeries;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const GRID_TOL: f64 = 1e-9;
/// Slack for comparisons that are exact in real arithmetic.
pub const NAKAO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NakaoProblem {
    pub phi: SampledSeries,
    pub c0: f64,
    pub rho: f64,
    pub k: SampledSeries,
    steps_per_unit: usize,
}

impl NakaoProblem {
    pub fn new(phi: SampledSeries, c0: f64, rho: f64, k: SampledSeries) -> Result<Self> {
        if !(c0 > 0.0) {
            return Err(Error::Domain(format!("C₀ must be > 0, got {c0}")));
        }
        if !(rho >= 0.0) {
            return Err(Error::Domain(format!("ρ must be ≥ 0, got {rho}")));
        }
        if phi.t != k.t {
            return Err(Error::Domain("φ and K must share one grid".into()));
        }
        if phi.len() < 2 {
            return Err(Error::Domain("grid needs at least two points".into()));
        }
        if phi.t[0].abs() > GRID_TOL {
            return Err(Error::Domain("grid must start at t = 0".into()));
        }
        let h = phi.t[1] - phi.t[0];
        if phi
            .t
            .windows(2)
            .any(|w| ((w[1] - w[0]) - h).abs() > GRID_TOL * h.max(1.0))
        {
            return Err(Error::Domain("grid must be uniform".into()));
        }
        let spu = (1.0 / h).round();
        if spu < 1.0 || (spu * h - 1.0).abs() > GRID_TOL {
            return Err(Error::Domain(format!("grid spacing {h} does not divide 1")));
        }
        if phi.y.iter().any(|&v| v < 0.0) {
            return Err(Error::Domain("φ must be non-negative".into()));
        }
        if k.y.iter().any(|&v| v < 0.0) || k.y.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("K must be non-negative and non-decreasing".into()));
        }
        Ok(Self {
            phi,
            c0,
            rho,
            k,
            steps_per_unit: spu as usize,
        })
    }

    pub fn steps_per_unit(&self) -> usize {
        self.steps_per_unit
    }

    fn horizon(&self) -> f64 {
        *self.phi.t.last().unwrap()
    }

    fn window_sup(&self, i: usize) -> f64 {
        let end = (i + self.steps_per_unit).min(self.phi.len() - 1);
        self.phi.y[i..=end].iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_first_unit(&self) -> f64 {
        self.window_sup(0)
    }

    fn k_at(&self, t: f64) -> f64 {
        let h = 1.0 / self.steps_per_unit as f64;
        let i = ((t / h) + GRID_TOL).floor() as usize;
        self.k.y[i.min(self.k.len() - 1)]
    }

    /// Number of complete windows `[t_i, t_i + 1]` on the grid.
    fn n_windows(&self) -> usize {
        self.phi.len().saturating_sub(self.steps_per_unit)
    }
}

/// Largest excess of the left side over the right side of the hypothesis;
/// `≤ 0` means it holds at every grid window.
pub fn nakao_hypothesis_residual(p: &NakaoProblem) -> Result<f64> {
    if p.horizon() < 1.0 - GRID_TOL {
        return Err(Error::Domain("grid shorter than one time unit".into()));
    }
    let s = p.steps_per_unit;
    Ok((0..p.n_windows())
        .map(|i| {
            let lhs = p.window_sup(i).powf(1.0 + p.rho);
            let rhs = p.c0 * (p.phi.y[i] - p.phi.y[i + s]) + p.k.y[i];
            lhs - rhs
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Explicit decay bound at time `t`.
pub fn nakao_bound(p: &NakaoProblem, t: f64) -> f64 {
    let sup = p.sup_first_unit();
    let k = p.k_at(t);
    if p.rho > 0.0 {
        let tail = k.powf(1.0 / (p.rho + 1.0));
        if sup == 0.0 {
            return tail;
        }
        let late = (t - 1.0).max(0.0);
        (p.rho * late / p.c0 + sup.powf(-p.rho)).powf(-1.0 / p.rho) + tail
    } else {
        let n = (t + GRID_TOL).floor();
        sup * (p.c0 / (1.0 + p.c0)).powf(n) + k
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NakaoVerdict {
    pub hypothesis_ok: bool,
    pub worst_hypothesis_residual: f64,
    pub conclusion_ok: bool,
    /// `max_i φ(t_i) − bound(t_i)`; `≤ 0` when the conclusion holds.
    pub worst_conclusion_margin: f64,
    /// `sup_{[0,1]} φ = 0` with `ρ > 0`: the bound uses its limit value.
    pub degenerate_sup: bool,
}

pub fn nakao_verify(p: &NakaoProblem) -> Result<NakaoVerdict> {
    let residual = nakao_hypothesis_residual(p)?;
    let hypothesis_ok = residual <= NAKAO_TOL;
    let margin = p
        .phi
        .t
        .iter()
        .zip(&p.phi.y)
        .map(|(&t, &y)| y - nakao_bound(p, t))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(NakaoVerdict {
        hypothesis_ok,
        worst_hypothesis_residual: residual,
        // the lemma only speaks when its hypothesis holds
        conclusion_ok: hypothesis_ok && margin <= NAKAO_TOL,
        worst_conclusion_margin: margin,
        degenerate_sup: p.rho > 0.0 && p.sup_first_unit() == 0.0,
    })
}

/// Smallest `C₀` making the hypothesis hold, or `None` when some window has
/// `φ(t) ≤ φ(t+1)` but `sup^{1+ρ} > K(t)`.
pub fn minimal_c0(phi: &[f64], k: &[f64], rho: f64, steps_per_unit: usize) -> Option<f64> {
    let mut c0: f64 = 0.0;
    for i in 0..phi.len().saturating_sub(steps_per_unit) {
        let sup = phi[i..=i + steps_per_unit].iter().copied().fold(0.0, f64::max);
        let excess = sup.powf(1.0 + rho) - k[i];
        if excess <= 0.0 {
            continue;
        }
        let drop = phi[i] - phi[i + steps_per_unit];
        if drop <= 0.0 {
            return None;
        }
        c0 = c0.max(excess / drop);
    }
    Some(c0)
}

/// Random problem satisfying the hypothesis by construction: non-increasing
/// `φ`, non-decreasing `K`, minimal feasible `C₀`.
pub fn random_nakao_problem<R: Rng>(rng: &mut R, rho: f64) -> NakaoProblem {
    const SPU: [usize; 5] = [1, 2, 4, 5, 10];
    loop {
        let spu = SPU[rng.random_range(0..SPU.len())];
        let units = rng.random_range(2..=16usize);
        let n = units * spu + 1;
        let h = 1.0 / spu as f64;
        let t: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let mut phi = Vec::with_capacity(n);
        let mut v: f64 = rng.random_range(0.0..4.0);
        if rng.random_bool(0.05) {
            v = 0.0;
        }
        for _ in 0..n {
            phi.push(v);
            // occasional flat stretches exercise the infeasible-window resample
            let shrink = if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random_range(0.0..0.6)
            };
            v *= 1.0 - shrink;
        }
        let mut k = Vec::with_capacity(n);
        let mut kv = 0.0;
        let forced = rng.random_bool(0.5);
        if forced {
            kv = rng.random_range(0.0..0.05);
        }
        for _ in 0..n {
            k.push(kv);
            if forced {
                kv += rng.random_range(0.0..0.02);
            }
        }
        let Some(c0) = minimal_c0(&phi, &k, rho, spu) else {
            continue;
        };
        // C₀ must be positive even when every window is slack
        let c0 = c0.max(1e-3);
        let phi = SampledSeries::new(t.clone(), phi).expect("finite grid");
        let k = SampledSeries::new(t, k).expect("finite grid");
        return NakaoProblem::new(phi, c0, rho, k).expect("generator respects invariants");
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSummary {
    pub trials: usize,
    pub violations: usize,
    /// Largest `φ − bound` seen over all trials.
    pub worst_margin: f64,
}

/// Seeded randomized check of the lemma for each `ρ`.
pub fn nakao_suite(seed: u64, trials: usize, rhos: &[f64]) -> Vec<(f64, SuiteSummary)> {
    rhos.iter()
        .enumerate()
        .map(|(ri, &rho)| {
            let results: Vec<NakaoVerdict> = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((ri as u64) << 40) ^ i as u64);
                    let p = random_nakao_problem(&mut rng, rho);
                    nakao_verify(&p).expect("generated problems are valid")
                })
                .collect();
            let violations = results.iter().filter(|v| !v.hypothesis_ok || !v.conclusion_ok).count();
            let worst_margin = results
                .iter()
                .map(|v| v.worst_conclusion_margin)
                .fold(f64::NEG_INFINITY, f64::max);
            (
                rho,
                SuiteSummary {
                    trials,
                    violations,
                    worst_margin,
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarauxCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `|‖u‖^r − ‖v‖^r| ≤ r·max(‖u‖, ‖v‖)^{r−1}‖u − v‖`.
pub fn haraux_check(u: &[f64], v: &[f64], r: f64) -> Result<HarauxCheck> {
    crate::error::check_len(u.len(), v.len())?;
    if !(r >= 1.0) {
        return Err(Error::Domain(format!("exponent must be ≥ 1, got {r}")));
    }
    let (nu, nv) = (norm(u), norm(v));
    let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    let lhs = (nu.powf(r) - nv.powf(r)).abs();
    let rhs = r * nu.max(nv).powf(r - 1.0) * norm(&diff);
    Ok(HarauxCheck {
        lhs,
        rhs,
        ok: lhs <= rhs + NAKAO_TOL,
    })
}

/// Random vectors of dimension 1..=8 with entries in `[−1, 1]`, `r ∈ [1, 6]`.
pub fn haraux_suite(seed: u64, trials: usize) -> SuiteSummary {
    let chunks = 64;
    let per = trials.div_ceil(chunks);
    let (violations, worst) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(c as u64));
            let mut bad = 0usize;
            let mut worst = f64::NEG_INFINITY;
            let count = per.min(trials.saturating_sub(c * per));
            for _ in 0..count {
                let d = rng.random_range(1..=8usize);
                let u: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let v: Vec<f64> = if rng.random_bool(0.1) {
                    // parallel pairs hit the equality case when r = 1
                    let s = rng.random_range(-2.0..2.0);
                    u.iter().map(|x| s * x).collect()
                } else {
                    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
                };
                let r = rng.random_range(1.0..=6.0);
                let c = haraux_check(&u, &v, r).expect("valid inputs");
                if !c.ok {
                    bad += 1;
                }
                worst = worst.max(c.lhs - c.rhs);
            }
            (bad, worst)
        })
        .reduce(|| (0, f64::NEG_INFINITY), |a, b| (a.0 + b.0, a.1.max(b.1)));
    SuiteSummary {
        trials,
        violations,
        worst_margin: worst,
    }
}
