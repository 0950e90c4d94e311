//! Sine-basis Galerkin realization of the hinged Laplacian `A` and
//! biharmonic `A₁ = A²` on `(0, L)`.
//!
//! The quadrature grid is the uniform interior grid `x_m = mL/(M+1)`,
//! `m = 1..M`, with constant weight `L/(M+1)`. On this grid the discrete
//! sine transform is exactly orthogonal for modes `1..=M`, and the rule
//! integrates `cos(kπx/L)` exactly unless `k` is a nonzero multiple of
//! `2(M+1)`. A product of `p` basis modes of index at most `N` only contains
//! `k ≤ pN`, so with `M = 8N` products of up to 16 modes are integrated
//! without aliasing; polynomial sources of degree `d` applied to an
//! `N`-mode field are projected exactly as long as `(d + 1)N < 2(M + 1)`.

use crate::error::{check_len, Error, Result};
use std::f64::consts::PI;

/// Which positive operator a fractional norm refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    /// Dirichlet Laplacian, eigenvalues `μ_j = (jπ/L)²`.
    A,
    /// Hinged biharmonic, eigenvalues `σ_j = μ_j²`.
    A1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    pub n_modes: usize,
    pub length: f64,
    pub kappa: f64,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub quad_nodes: Vec<f64>,
    pub quad_weight: f64,
    /// `basis[j * M + m] = w_{j+1}(x_m)`.
    basis: Vec<f64>,
}

/// Sampled values of a field at the quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField(pub Vec<f64>);

/// Galerkin coefficients of `(u, u_t)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalState {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub t: f64,
}

impl ModalState {
    pub fn zeros(n: usize) -> Self {
        Self {
            a: vec![0.0; n],
            b: vec![0.0; n],
            t: 0.0,
        }
    }

    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        check_len(a.len(), b.len())?;
        Ok(Self { a, b, t: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(&self.b).all(|x| x.is_finite()) && self.t.is_finite()
    }

    /// Componentwise difference `self − other`, keeping `self.t`.
    pub fn diff(&self, other: &ModalState) -> ModalState {
        ModalState {
            a: self.a.iter().zip(&other.a).map(|(x, y)| x - y).collect(),
            b: self.b.iter().zip(&other.b).map(|(x, y)| x - y).collect(),
            t: self.t,
        }
    }
}

impl SpectralModel {
    pub fn new(n_modes: usize, length: f64, kappa: f64, quad_points: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidConfig("n_modes must be ≥ 1".into()));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidConfig(format!("length must be > 0, got {length}")));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidConfig(format!("kappa must be ≥ 0, got {kappa}")));
        }
        if quad_points < 2 * n_modes {
            return Err(Error::InvalidConfig(format!(
                "quad_points must be ≥ 2·n_modes = {}, got {quad_points}",
                2 * n_modes
            )));
        }
        let mu: Vec<f64> = (1..=n_modes)
            .map(|j| {
                let k = j as f64 * PI / length;
                k * k
            })
            .collect();
        let sigma = mu.iter().map(|m| m * m).collect();
        let h = length / (quad_points as f64 + 1.0);
        let quad_nodes: Vec<f64> = (1..=quad_points).map(|m| m as f64 * h).collect();
        let norm = (2.0 / length).sqrt();
        let mut basis = Vec::with_capacity(n_modes * quad_points);
        for j in 1..=n_modes {
            for m in 1..=quad_points {
                // integer phase keeps sin(jπm/(M+1)) exact to rounding
                let phase = (j * m) % (2 * (quad_points + 1));
                basis.push(norm * (PI * phase as f64 / (quad_points as f64 + 1.0)).sin());
            }
        }
        Ok(Self {
            n_modes,
            length,
            kappa,
            mu,
            sigma,
            quad_nodes,
            quad_weight: h,
            basis,
        })
    }

    /// Model with the default grid `M = 8N`.
    pub fn with_default_grid(n_modes: usize, length: f64, kappa: f64) -> Result<Self> {
        Self::new(n_modes, length, kappa, 8 * n_modes.max(1))
    }

    pub fn quad_points(&self) -> usize {
        self.quad_nodes.len()
    }

    /// `w_j(x_m)` for zero-based mode `j` and node `m`.
    #[inline]
    pub fn basis(&self, j: usize, m: usize) -> f64 {
        self.basis[j * self.quad_points() + m]
    }

    pub fn basis_row(&self, j: usize) -> &[f64] {
        let m = self.quad_points();
        &self.basis[j * m..(j + 1) * m]
    }

    /// Linear frequencies `ω_j = (σ_j + κμ_j)^{1/2}`.
    pub fn frequencies(&self) -> Vec<f64> {
        self.sigma
            .iter()
            .zip(&self.mu)
            .map(|(s, m)| (s + self.kappa * m).sqrt())
            .collect()
    }

    pub fn eigenvalues(&self, op: Operator) -> &[f64] {
        match op {
            Operator::A => &self.mu,
            Operator::A1 => &self.sigma,
        }
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Result<GridField> {
        check_len(self.n_modes, coeffs.len())?;
        Ok(GridField(self.synthesize_unchecked(coeffs)))
    }

    pub(crate) fn synthesize_unchecked(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.quad_points()];
        for (j, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(self.basis_row(j)) {
                *o += c * w;
            }
        }
        out
    }

    pub fn analyze(&self, field: &GridField) -> Result<Vec<f64>> {
        check_len(self.quad_points(), field.0.len())?;
        Ok(self.analyze_unchecked(&field.0))
    }

    pub(crate) fn analyze_unchecked(&self, values: &[f64]) -> Vec<f64> {
        (0..self.n_modes)
            .map(|j| {
                let s: f64 = values.iter().zip(self.basis_row(j)).map(|(v, w)| v * w).sum();
                self.quad_weight * s
            })
            .collect()
    }

    /// Quadrature approximation of `∫ g(x) dx` from nodal values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.quad_weight * values.iter().sum::<f64>()
    }

    /// `‖Opˢ c‖ = (Σ λ_j^{2s} c_j²)^{1/2}`.
    pub fn frac_norm(&self, coeffs: &[f64], op: Operator, s: f64) -> Result<f64> {
        check_len(self.n_modes, coeffs.len())?;
        Ok(self.frac_norm_sq_unchecked(coeffs, op, s).sqrt())
    }

    pub(crate) fn frac_norm_sq_unchecked(&self, coeffs: &[f64], op: Operator, s: f64) -> f64 {
        if s == 0.0 {
            return coeffs.iter().map(|c| c * c).sum();
        }
        self.eigenvalues(op)
            .iter()
            .zip(coeffs)
            .map(|(l, c)| l.powf(2.0 * s) * c * c)
            .sum()
    }

    /// `‖A₁^{1/2}a‖² + ‖b‖²`.
    pub fn phase_norm_sq(&self, state: &ModalState) -> f64 {
        let pot: f64 = self.sigma.iter().zip(&state.a).map(|(s, a)| s * a * a).sum();
        let kin: f64 = state.b.iter().map(|b| b * b).sum();
        pot + kin
    }

    pub fn phase_norm(&self, state: &ModalState) -> Result<f64> {
        check_len(self.n_modes, state.a.len())?;
        check_len(self.n_modes, state.b.len())?;
        Ok(self.phase_norm_sq(state).sqrt())
    }

    /// Coordinates in which the Euclidean norm equals the phase norm:
    /// `(σ_j^{1/2} a_j, b_j)`.
    pub fn phase_coordinates(&self, state: &ModalState) -> Vec<f64> {
        self.sigma
            .iter()
            .zip(&state.a)
            .map(|(s, a)| s.sqrt() * a)
            .chain(state.b.iter().copied())
            .collect()
    }

    /// Smallest `C` with `‖A^{1/2}c‖ ≤ C‖A₁^{1/2}c‖` on the truncated space,
    /// together with the mode index (1-based) attaining it.
    pub fn embedding_constant(&self) -> (f64, usize) {
        self.mu
            .iter()
            .zip(&self.sigma)
            .enumerate()
            .map(|(j, (m, s))| ((m / s).sqrt(), j + 1))
            .fold((f64::NEG_INFINITY, 0), |acc, x| if x.0 > acc.0 { x } else { acc })
    }

    /// Smallest `C_α` with `‖A^α u‖² + ‖v‖² ≤ C_α(‖A₁^{1/2}u‖² + ‖v‖²)`
    /// on the truncated space.
    pub fn c_alpha(&self, alpha: f64) -> f64 {
        self.mu
            .iter()
            .zip(&self.sigma)
            .map(|(m, s)| m.powf(2.0 * alpha) / s)
            .fold(1.0, f64::max)
    }

    /// Truncated-space value of `μ₀ = max_j μ_j/σ_j`, i.e. the smallest
    /// constant with `‖A^{1/2}u‖² ≤ μ₀‖A₁^{1/2}u‖²`.
    pub fn mu0(&self) -> f64 {
        self.mu.iter().zip(&self.sigma).map(|(m, s)| m / s).fold(0.0, f64::max)
    }

    pub fn check_state(&self, state: &ModalState) -> Result<()> {
        check_len(self.n_modes, state.a.len())?;
        check_len(self.n_modes, state.b.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pi_model(n: usize, m: usize) -> SpectralModel {
        SpectralModel::new(n, PI, 0.0, m).unwrap()
    }

    #[test]
    fn eigenvalues_on_pi_interval() {
        let m = pi_model(4, 64);
        assert_eq!(m.mu, vec![1.0, 4.0, 9.0, 16.0]);
        assert_eq!(m.sigma, vec![1.0, 16.0, 81.0, 256.0]);
        let one = pi_model(1, 8);
        assert_eq!(one.sigma[0], 1.0);
    }

    #[test]
    fn eigenvalues_on_length_two() {
        let m = SpectralModel::new(8, 2.0, 0.5, 32).unwrap();
        // (π/2)² to 17 digits
        let mu1 = 2.467_401_100_272_339_7;
        assert!((m.mu[0] - mu1).abs() < 1e-15);
        assert!((m.sigma[0] - mu1 * mu1).abs() < 1e-14);
        for j in 0..8 {
            let k = (j as f64 + 1.0) * PI / 2.0;
            assert!((m.mu[j] - k * k).abs() <= 1e-15 * k * k);
            assert_eq!(m.sigma[j], m.mu[j] * m.mu[j]);
        }
        assert!(m.mu.windows(2).all(|w| w[0] < w[1]));
        assert!(m.sigma.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(matches!(
            SpectralModel::new(0, PI, 0.0, 8),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            SpectralModel::new(4, 0.0, 0.0, 64),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            SpectralModel::new(4, -1.0, 0.0, 64),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            SpectralModel::new(4, PI, -0.1, 64),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            SpectralModel::new(4, PI, 0.0, 7),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn discrete_orthonormality() {
        for (n, mq) in [(4, 8), (5, 10), (8, 64), (16, 33)] {
            let m = pi_model(n, mq);
            for i in 0..n {
                for j in 0..n {
                    let s: f64 = (0..mq).map(|k| m.quad_weight * m.basis(i, k) * m.basis(j, k)).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((s - want).abs() < 1e-12, "({i},{j}) {s}");
                }
            }
        }
    }

    #[test]
    fn synthesize_basic() {
        let m = pi_model(3, 24);
        let z = m.synthesize(&[0.0; 3]).unwrap();
        assert!(z.0.iter().all(|&v| v == 0.0));
        let f = m.synthesize(&[1.0, 0.0, 0.0]).unwrap();
        for (v, x) in f.0.iter().zip(&m.quad_nodes) {
            assert!((v - (2.0 / PI).sqrt() * x.sin()).abs() < 1e-14);
        }
        assert!(matches!(m.synthesize(&[1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn analyze_basic() {
        let m = pi_model(4, 32);
        assert_eq!(m.analyze(&GridField(vec![0.0; 32])).unwrap(), vec![0.0; 4]);
        let w2 = GridField(m.basis_row(1).to_vec());
        let c = m.analyze(&w2).unwrap();
        for (j, cj) in c.iter().enumerate() {
            let want = if j == 1 { 1.0 } else { 0.0 };
            assert!((cj - want).abs() < 1e-12);
        }
        assert!(m.analyze(&GridField(vec![0.0; 3])).is_err());
    }

    #[test]
    fn analyze_sin_cubed() {
        // sin³x = (3 sin x − sin 3x)/4 and sin(jx) = √(π/2)·w_j
        let m = pi_model(6, 48);
        let field = GridField(m.quad_nodes.iter().map(|x| x.sin().powi(3)).collect());
        let c = m.analyze(&field).unwrap();
        let s = (PI / 2.0).sqrt();
        let want = [0.75 * s, 0.0, -0.25 * s, 0.0, 0.0, 0.0];
        for (a, b) in c.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn frac_norm_examples() {
        let m = pi_model(4, 32);
        let e1 = [1.0, 0.0, 0.0, 0.0];
        assert_eq!(m.frac_norm(&e1, Operator::A1, 0.5).unwrap(), 1.0);
        let c = [0.3, -1.2, 0.7, 2.0];
        let eu = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert_eq!(m.frac_norm(&c, Operator::A, 0.0).unwrap(), eu);
        assert_eq!(m.frac_norm(&c, Operator::A1, 0.0).unwrap(), eu);
        for alpha in [0.0, 0.25, 0.5, 1.0] {
            let a = m.frac_norm(&e1, Operator::A, alpha).unwrap();
            let b = m.frac_norm(&e1, Operator::A1, alpha / 2.0).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn phase_norm_examples() {
        let m = pi_model(3, 24);
        let s = ModalState::new(vec![1.0, 0.0, 0.0], vec![0.0; 3]).unwrap();
        assert_eq!(m.phase_norm(&s).unwrap(), 1.0);
        let s = ModalState::new(vec![0.0; 3], vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(m.phase_norm(&s).unwrap(), 1.0);
        let s = ModalState::new(vec![0.5, -0.2, 0.1], vec![0.3, 0.9, -0.4]).unwrap();
        let lhs = m.phase_norm(&s).unwrap().powi(2);
        let rhs = m.frac_norm(&s.a, Operator::A1, 0.5).unwrap().powi(2)
            + m.frac_norm(&s.b, Operator::A, 0.0).unwrap().powi(2);
        assert!((lhs - rhs).abs() < 1e-13 * rhs);
    }

    #[test]
    fn embedding_constant_attained_at_first_mode() {
        for l in [PI, 1.0, 2.0, 7.5] {
            let m = SpectralModel::new(10, l, 0.0, 80).unwrap();
            let (c, j) = m.embedding_constant();
            assert_eq!(j, 1);
            assert!((c - m.mu[0].powf(-0.5)).abs() < 1e-14 * c);
        }
    }

    #[test]
    fn c_alpha_is_one_on_pi_interval() {
        let m = pi_model(16, 128);
        for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
            assert_eq!(m.c_alpha(alpha), 1.0);
        }
    }
}
