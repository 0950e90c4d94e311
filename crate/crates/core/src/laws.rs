//! Constitutive closures: the damping coefficient `k`, the source `f` with
//! its primitive `f̂`, and the forcing `λh`.

use crate::error::{check_len, Error, Result};
use crate::spectral::SpectralModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum K2Kind {
    /// `k(s) = γ`
    Constant,
    /// `k(s) = γe^{−s}`
    ExpDecay,
    /// `k(s) = γ/(1+s)`
    Rational,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum K3Kind {
    /// `k(s) = γ(1 − 1/s)` for `s > 1`
    Rational,
    /// `k(s) = γ(1 − e^{−(s−1)})` for `s > 1`
    ShiftedExp,
}

/// Damping coefficient `k(𝓔_α(u, u_t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingLaw {
    /// `k ≡ 0`; conservative dynamics.
    Undamped,
    /// Degenerate at the origin: `k(s) = γs^q`, `q ≥ 1/2`.
    K1Monomial { gamma: f64, q: f64 },
    /// Strictly positive `C¹` coefficient.
    K2Positive { gamma: f64, kind: K2Kind },
    /// Vanishes on `[0, 1]`, strictly increasing and bounded beyond.
    K3Threshold { gamma: f64, kind: K3Kind },
}

impl DampingLaw {
    pub fn validate(&self) -> Result<()> {
        let gamma = match *self {
            DampingLaw::Undamped => return Ok(()),
            DampingLaw::K1Monomial { gamma, q } => {
                if !(q >= 0.5) || !q.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "k1 exponent must satisfy q ≥ 1/2, got q = {q}"
                    )));
                }
                gamma
            }
            DampingLaw::K2Positive { gamma, .. } | DampingLaw::K3Threshold { gamma, .. } => gamma,
        };
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidConfig(format!("damping γ must be > 0, got {gamma}")));
        }
        Ok(())
    }

    /// `k(s)` for `s ≥ 0`.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("damping argument must be ≥ 0, got {s}")));
        }
        Ok(self.eval_unchecked(s))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, s: f64) -> f64 {
        match *self {
            DampingLaw::Undamped => 0.0,
            DampingLaw::K1Monomial { gamma, q } => {
                if q == 1.0 {
                    gamma * s
                } else {
                    gamma * s.powf(q)
                }
            }
            DampingLaw::K2Positive { gamma, kind } => match kind {
                K2Kind::Constant => gamma,
                K2Kind::ExpDecay => gamma * (-s).exp(),
                K2Kind::Rational => gamma / (1.0 + s),
            },
            DampingLaw::K3Threshold { gamma, kind } => {
                if s <= 1.0 {
                    0.0
                } else {
                    match kind {
                        K3Kind::Rational => gamma * (1.0 - 1.0 / s),
                        K3Kind::ShiftedExp => -gamma * (-(s - 1.0)).exp_m1(),
                    }
                }
            }
        }
    }

    /// Whether `k` does not depend on its argument.
    pub fn is_constant(&self) -> bool {
        matches!(
            self,
            DampingLaw::Undamped
                | DampingLaw::K2Positive {
                    kind: K2Kind::Constant,
                    ..
                }
        )
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            DampingLaw::Undamped => 0.0,
            DampingLaw::K1Monomial { gamma, .. }
            | DampingLaw::K2Positive { gamma, .. }
            | DampingLaw::K3Threshold { gamma, .. } => gamma,
        }
    }
}

/// Nonlinear source `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceLaw {
    Zero,
    /// `f(s) = |s|^δ s − σ|s|^r s`, `0 < r < δ`, growth exponent `p = δ`.
    DoublePower {
        delta: f64,
        r: f64,
        sigma_c: f64,
    },
}

impl SourceLaw {
    pub fn cubic() -> Self {
        SourceLaw::DoublePower {
            delta: 2.0,
            r: 1.0,
            sigma_c: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let SourceLaw::DoublePower { delta, r, sigma_c } = *self {
            if !(r > 0.0 && r < delta) || !delta.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "source exponents must satisfy 0 < r < δ, got r = {r}, δ = {delta}"
                )));
            }
            if !(sigma_c >= 0.0) || !sigma_c.is_finite() {
                return Err(Error::InvalidConfig(format!("source σ must be ≥ 0, got {sigma_c}")));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SourceLaw::Zero)
    }

    pub fn growth_exponent(&self) -> f64 {
        match *self {
            SourceLaw::Zero => 0.0,
            SourceLaw::DoublePower { delta, .. } => delta,
        }
    }

    #[inline]
    pub fn f(&self, s: f64) -> f64 {
        match *self {
            SourceLaw::Zero => 0.0,
            SourceLaw::DoublePower { delta, r, sigma_c } => {
                let a = s.abs();
                let lead = if delta == 2.0 { a * a } else { a.powf(delta) };
                let low = if sigma_c == 0.0 {
                    0.0
                } else if r == 1.0 {
                    sigma_c * a
                } else {
                    sigma_c * a.powf(r)
                };
                (lead - low) * s
            }
        }
    }

    /// `f̂(s) = ∫₀ˢ f`.
    pub fn primitive(&self, s: f64) -> f64 {
        match *self {
            SourceLaw::Zero => 0.0,
            SourceLaw::DoublePower { delta, r, sigma_c } => {
                let a = s.abs();
                a.powf(delta + 2.0) / (delta + 2.0) - sigma_c * a.powf(r + 2.0) / (r + 2.0)
            }
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match *self {
            SourceLaw::Zero => 0.0,
            SourceLaw::DoublePower { delta, r, sigma_c } => {
                let a = s.abs();
                (delta + 1.0) * a.powf(delta) - sigma_c * (r + 1.0) * a.powf(r)
            }
        }
    }

    /// Galerkin projection `g_j = ⟨f(u), w_j⟩` of `u = Σ a_j w_j`.
    pub fn project(&self, model: &SpectralModel, a: &[f64]) -> Result<Vec<f64>> {
        check_len(model.n_modes, a.len())?;
        Ok(self.project_unchecked(model, a))
    }

    pub(crate) fn project_unchecked(&self, model: &SpectralModel, a: &[f64]) -> Vec<f64> {
        if self.is_zero() {
            return vec![0.0; model.n_modes];
        }
        let mut u = model.synthesize_unchecked(a);
        for v in u.iter_mut() {
            *v = self.f(*v);
        }
        model.analyze_unchecked(&u)
    }

    /// Quadrature value of `∫ f̂(u) dx`.
    pub fn potential(&self, model: &SpectralModel, a: &[f64]) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let u = model.synthesize_unchecked(a);
        model.quad_weight * u.iter().map(|&v| self.primitive(v)).sum::<f64>()
    }
}

/// Free function form of [`SourceLaw::project`].
pub fn project_source(model: &SpectralModel, law: &SourceLaw, a: &[f64]) -> Result<Vec<f64>> {
    law.project(model, a)
}

/// External force `h_λ = λh` in modal coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    pub lambda: f64,
    pub h: Vec<f64>,
}

impl Forcing {
    pub fn new(lambda: f64, h: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Domain(format!("λ must lie in [0, 1], got {lambda}")));
        }
        Ok(Self { lambda, h })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            lambda: 0.0,
            h: vec![0.0; n],
        }
    }

    /// `h = amplitude·w_j`, 1-based `j`.
    pub fn mode(n: usize, j: usize, amplitude: f64, lambda: f64) -> Result<Self> {
        if j == 0 || j > n {
            return Err(Error::InvalidConfig(format!("forcing mode {j} outside 1..={n}")));
        }
        let mut h = vec![0.0; n];
        h[j - 1] = amplitude;
        Self::new(lambda, h)
    }

    pub fn effective(&self) -> Vec<f64> {
        self.h.iter().map(|h| self.lambda * h).collect()
    }

    /// `‖h_λ‖²`.
    pub fn norm_sq(&self) -> f64 {
        self.lambda * self.lambda * self.h.iter().map(|h| h * h).sum::<f64>()
    }

    pub fn is_zero(&self) -> bool {
        self.lambda == 0.0 || self.h.iter().all(|&h| h == 0.0)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.h.clone())
    }
}

/// Sampled constants of the source growth and sign conditions.
///
/// `c_f` and `c_big_f` are the pair used by the energy lower bound
/// `f̂(u) ≥ −C_f − (c_f/2)|u|²` and the stationary estimate
/// `−f(u)u ≤ C_f + c_f|u|²`; on a bounded range the quadratic slack can
/// always be taken as `c_f = 0`. `upper_c_f` is the smallest slack for
/// `f̂(u) ≤ f(u)u + (c_f/2)|u|²`, reported separately because it may
/// exceed `σ₁` for strongly focusing sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionConstants {
    pub c_f_prime: f64,
    pub c_f: f64,
    pub c_big_f: f64,
    pub upper_c_f: f64,
    /// Sample where the upper inequality is tightest.
    pub upper_argmax: f64,
}

impl AssumptionConstants {
    pub const ZERO: AssumptionConstants = AssumptionConstants {
        c_f_prime: 0.0,
        c_f: 0.0,
        c_big_f: 0.0,
        upper_c_f: 0.0,
        upper_argmax: 0.0,
    };

    /// `ω = 1 − c_f/σ₁`; errors when `c_f ≥ σ₁`.
    pub fn omega(&self, sigma1: f64) -> Result<f64> {
        if self.c_f >= sigma1 {
            return Err(Error::AssumptionViolation(format!(
                "c_f = {} must be < σ₁ = {sigma1}",
                self.c_f
            )));
        }
        Ok(1.0 - self.c_f / sigma1)
    }

    /// Whether the upper inequality holds with a slack below `σ₁`.
    pub fn upper_within(&self, sigma1: f64) -> Result<()> {
        if self.upper_c_f >= sigma1 {
            return Err(Error::AssumptionViolation(format!(
                "f̂(u) ≤ f(u)u + (c_f/2)u² needs c_f ≥ {:.6} (tightest at u = {:.6}), not < σ₁ = {sigma1}",
                self.upper_c_f, self.upper_argmax
            )));
        }
        Ok(())
    }
}

/// Scan `[−R, R]` on `samples` points for the growth and sign constants.
pub fn assumption_constants(law: &SourceLaw, range: f64, samples: usize) -> Result<AssumptionConstants> {
    if !(range > 0.0) || !range.is_finite() {
        return Err(Error::Domain(format!("sample range must be > 0, got {range}")));
    }
    if samples < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    if law.is_zero() {
        return Ok(AssumptionConstants::ZERO);
    }
    let p = law.growth_exponent();
    let mut out = AssumptionConstants::ZERO;
    for i in 0..samples {
        let u = -range + 2.0 * range * i as f64 / (samples - 1) as f64;
        let fu = law.f(u);
        let fh = law.primitive(u);
        let df = law.derivative(u);
        if !(fu.is_finite() && fh.is_finite() && df.is_finite()) {
            return Err(Error::AssumptionViolation(format!(
                "source not finite at u = {u}; no finite constants exist on the range"
            )));
        }
        out.c_f_prime = out.c_f_prime.max(df.abs() / (1.0 + u.abs().powf(p)));
        out.c_big_f = out.c_big_f.max(-fh).max(-fu * u);
        if u != 0.0 {
            let need = 2.0 * (fh - fu * u) / (u * u);
            if need > out.upper_c_f {
                out.upper_c_f = need;
                out.upper_argmax = u;
            }
        }
    }
    Ok(out)
}
