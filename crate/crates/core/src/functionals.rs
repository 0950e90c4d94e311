//! Energy functionals, the closed-form decay envelopes of the degenerate
//! monomial damping, and log-linear rate fits.

use crate::error::{Error, Result};
use crate::laws::{AssumptionConstants, Forcing, SourceLaw};
use crate::spectral::{ModalState, Operator, SpectralModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub bending: f64,
    pub membrane: f64,
    pub source: f64,
    pub work: f64,
    pub total: f64,
    pub k_lambda: f64,
    pub modified: f64,
    pub e_alpha: f64,
}

/// `K_λ = C_f|Ω| + ‖h_λ‖²/(σ₁ω)`.
pub fn k_lambda(model: &SpectralModel, constants: &AssumptionConstants, forcing: &Forcing) -> Result<f64> {
    let sigma1 = model.sigma[0];
    let omega = constants.omega(sigma1)?;
    Ok(constants.c_big_f * model.length + forcing.norm_sq() / (sigma1 * omega))
}

/// `𝓔_α(u, u_t) = ‖A^α u‖² + ‖u_t‖²`.
pub fn e_alpha(model: &SpectralModel, alpha: f64, state: &ModalState) -> f64 {
    e_alpha_parts(&model.mu, alpha, &state.a, &state.b)
}

#[inline]
pub(crate) fn e_alpha_parts(mu: &[f64], alpha: f64, a: &[f64], b: &[f64]) -> f64 {
    let pot: f64 = if alpha == 0.0 {
        a.iter().map(|x| x * x).sum()
    } else if alpha == 0.5 {
        mu.iter().zip(a).map(|(m, x)| m * x * x).sum()
    } else if alpha == 1.0 {
        mu.iter().zip(a).map(|(m, x)| m * m * x * x).sum()
    } else {
        mu.iter().zip(a).map(|(m, x)| m.powf(2.0 * alpha) * x * x).sum()
    };
    pot + b.iter().map(|x| x * x).sum::<f64>()
}

pub fn energy(
    model: &SpectralModel,
    source: &SourceLaw,
    forcing: &Forcing,
    constants: &AssumptionConstants,
    alpha: f64,
    state: &ModalState,
) -> Result<EnergyBreakdown> {
    model.check_state(state)?;
    let k_lambda = k_lambda(model, constants, forcing)?;
    Ok(energy_with_offset(model, source, forcing, k_lambda, alpha, state))
}

pub(crate) fn energy_with_offset(
    model: &SpectralModel,
    source: &SourceLaw,
    forcing: &Forcing,
    k_lambda: f64,
    alpha: f64,
    state: &ModalState,
) -> EnergyBreakdown {
    let kinetic = 0.5 * state.b.iter().map(|b| b * b).sum::<f64>();
    let bending = 0.5 * model.frac_norm_sq_unchecked(&state.a, Operator::A1, 0.5);
    let membrane = 0.5 * model.kappa * model.frac_norm_sq_unchecked(&state.a, Operator::A, 0.5);
    let source_term = source.potential(model, &state.a);
    let work = -forcing.lambda * forcing.h.iter().zip(&state.a).map(|(h, a)| h * a).sum::<f64>();
    let total = kinetic + bending + membrane + source_term + work;
    EnergyBreakdown {
        kinetic,
        bending,
        membrane,
        source: source_term,
        work,
        total,
        k_lambda,
        modified: total + k_lambda,
        e_alpha: e_alpha(model, alpha, state),
    }
}

/// Constants of the two-sided polynomial decay estimate for `k(s) = γs^q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    pub omega: f64,
    pub k_lambda: f64,
    pub c_alpha: f64,
    pub c_lower: f64,
    pub c_bar: f64,
    pub c_upper: f64,
    pub e0: f64,
    pub q: f64,
    pub gamma: f64,
}

pub fn envelope_constants(
    q: f64,
    gamma: f64,
    alpha: f64,
    model: &SpectralModel,
    constants: &AssumptionConstants,
    forcing: &Forcing,
    e0: f64,
) -> Result<EnvelopeParams> {
    if !(q >= 0.5) {
        return Err(Error::InvalidConfig(format!("q ≥ 1/2 required, got {q}")));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidConfig(format!("γ > 0 required, got {gamma}")));
    }
    if !(e0 > 0.0) {
        return Err(Error::Domain(format!("modified initial energy must be > 0, got {e0}")));
    }
    let sigma1 = model.sigma[0];
    let omega = constants.omega(sigma1)?;
    let k_lambda = k_lambda(model, constants, forcing)?;
    let c_alpha = model.c_alpha(alpha);
    Ok(envelope_from_parts(q, gamma, omega, sigma1, c_alpha, k_lambda, e0))
}

pub(crate) fn envelope_from_parts(
    q: f64,
    gamma: f64,
    omega: f64,
    sigma1: f64,
    c_alpha: f64,
    k_lambda: f64,
    e0: f64,
) -> EnvelopeParams {
    let c_lower = omega.powf(q) / (2f64.powf(2.0 * q + 1.0) * c_alpha.powf(q) * gamma);
    let g1 = gamma.powf(1.0 / (q + 1.0));
    let c_bar = 3.0 / (2.0 * g1)
        + 128.0 / (omega * sigma1 * g1)
        + 2f64.powf(2.0 * q + 3.0) * gamma.powf((2.0 * q + 1.0) / (q + 1.0)) * c_alpha.powf(2.0 * q)
            / (omega.powf(2.0 * q + 1.0) * sigma1)
            * e0.powf(2.0 * q);
    let c_upper = 2f64.powf(q + 1.0)
        * (2f64.powf((2.0 * q + 1.0) / (q + 1.0)) * e0.powf(q / (q + 1.0)) + 4.0 * c_bar).powf(q + 1.0);
    EnvelopeParams {
        omega,
        k_lambda,
        c_alpha,
        c_lower,
        c_bar,
        c_upper,
        e0,
        q,
        gamma,
    }
}

/// Lower and upper envelopes of `Ẽ(t)`.
pub fn decay_envelopes(p: &EnvelopeParams, t: f64) -> (f64, f64) {
    let base = p.e0.powf(-p.q);
    let lower = (p.q * t / p.c_lower + base).powf(-1.0 / p.q);
    let late = (t - 1.0).max(0.0);
    let upper = (p.q * late / p.c_upper + base).powf(-1.0 / p.q) + 8.0 * p.k_lambda;
    (lower, upper)
}

/// Time series with strictly increasing sample times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampledSeries {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
}

impl SampledSeries {
    pub fn new(t: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        crate::error::check_len(t.len(), y.len())?;
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("sample times must be strictly increasing".into()));
        }
        if t.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Domain("series contains non-finite values".into()));
        }
        Ok(Self { t, y })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn window(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t
            .iter()
            .zip(&self.y)
            .filter(move |(t, _)| **t >= lo && **t <= hi)
            .map(|(t, y)| (*t, *y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub(crate) fn least_squares(points: &[(f64, f64)]) -> LineFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    LineFit { slope, intercept, r2 }
}

fn log_fit(series: &SampledSeries, window: (f64, f64), log_t: bool) -> Result<LineFit> {
    let mut pts = Vec::new();
    for (t, y) in series.window(window.0, window.1) {
        if !(y > 0.0) {
            return Err(Error::Domain(format!("non-positive value {y} at t = {t}")));
        }
        if log_t && !(t > 0.0) {
            return Err(Error::Domain(format!("log-time fit needs t > 0, got {t}")));
        }
        pts.push((if log_t { t.ln() } else { t }, y.ln()));
    }
    if pts.len() < 10 {
        return Err(Error::Domain(format!(
            "need ≥ 10 samples in window [{}, {}], got {}",
            window.0,
            window.1,
            pts.len()
        )));
    }
    Ok(least_squares(&pts))
}

/// Least-squares line through `(ln t, ln y)`.
pub fn fit_power_rate(series: &SampledSeries, window: (f64, f64)) -> Result<LineFit> {
    log_fit(series, window, true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub rate: f64,
    pub amplitude: f64,
    pub r2: f64,
}

/// Least-squares fit of `y ≈ amplitude·e^{−rate·t}`.
pub fn fit_exp_rate(series: &SampledSeries, window: (f64, f64)) -> Result<ExpFit> {
    let l = log_fit(series, window, false)?;
    Ok(ExpFit {
        rate: -l.slope,
        amplitude: l.intercept.exp(),
        r2: l.r2,
    })
}
