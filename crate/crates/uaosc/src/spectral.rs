//! Fourier representation in θ of the filtered field at a fixed state.
//!
//! `F(θ,u) = Σ_ℓ c_ℓ(u) e^{iℓθ}`; from the coefficients we get the average `⟨F⟩`, the
//! zero-average primitives `G_ν`, `H_ν`, their u-derivatives and `⟨∂₂G F⟩`.

use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Truncation and sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    /// Largest mode index L.
    pub max_mode: usize,
    /// Number of θ samples, at least 4L+2.
    pub samples: usize,
    /// Reconstruction residual allowed, relative to `1 + max_θ |F|`.
    pub tail_tol: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig { max_mode: 16, samples: 66, tail_tol: 1e-10 }
    }
}

impl SpectralConfig {
    pub fn with_modes(max_mode: usize) -> Self {
        SpectralConfig { max_mode, samples: (4 * max_mode + 2).max(64), ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 4 * self.max_mode + 2 {
            return Err(Error::Domain(format!(
                "need at least 4L+2 = {} samples, got {}",
                4 * self.max_mode + 2,
                self.samples
            )));
        }
        Ok(())
    }
}

/// Fourier coefficients of `θ ↦ F(θ,u)` (and optionally of `θ ↦ ∂₂F(θ,u)`).
#[derive(Debug, Clone)]
pub struct FourierTable {
    u: DVector<f64>,
    max_mode: usize,
    samples: usize,
    coeffs: Vec<DVector<Complex64>>,
    jac: Option<Vec<DMatrix<Complex64>>>,
    residual: f64,
}

fn ie(l: i64) -> Complex64 {
    Complex64::new(0.0, l as f64)
}

impl FourierTable {
    pub fn anchor(&self) -> &DVector<f64> {
        &self.u
    }
    pub fn max_mode(&self) -> usize {
        self.max_mode
    }
    pub fn samples(&self) -> usize {
        self.samples
    }
    pub fn dim(&self) -> usize {
        self.u.len()
    }
    /// Largest reconstruction residual on the sample grid.
    pub fn residual(&self) -> f64 {
        self.residual
    }
    pub fn has_jacobian(&self) -> bool {
        self.jac.is_some()
    }

    fn idx(&self, l: i64) -> usize {
        assert!(l.unsigned_abs() as usize <= self.max_mode, "mode {l} outside table range");
        (l + self.max_mode as i64) as usize
    }

    /// `c_ℓ`.
    pub fn coeff(&self, l: i64) -> &DVector<Complex64> {
        &self.coeffs[self.idx(l)]
    }

    /// Coefficient of `F_ν(θ) = F(νθ)`: `c_{νℓ}`.
    pub fn coeff_nu(&self, nu: i32, l: i64) -> &DVector<Complex64> {
        self.coeff(nu as i64 * l)
    }

    /// `∂_u c_ℓ`, the coefficients of `∂₂F`.
    pub fn jac_coeff(&self, l: i64) -> &DMatrix<Complex64> {
        let j = self.jac.as_ref().expect("table built without Jacobian");
        &j[self.idx(l)]
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let l = self.max_mode as i64;
        -l..=l
    }

    /// Nonzero modes whose coefficient (or Jacobian coefficient) is above roundoff level.
    pub fn active_modes(&self) -> Vec<i64> {
        let cmax = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let jmax = self.jac.as_ref().map(|j| j.iter().map(|m| m.norm()).fold(0.0, f64::max)).unwrap_or(0.0);
        let cut = 1e-15;
        self.modes()
            .filter(|&l| l != 0)
            .filter(|&l| {
                let i = self.idx(l);
                let c_on = self.coeffs[i].norm() > cut * cmax.max(1e-300);
                let j_on = self.jac.as_ref().map(|j| j[i].norm() > cut * jmax.max(1e-300)).unwrap_or(false);
                c_on || j_on
            })
            .collect()
    }

    /// `⟨F⟩(u) = c_0`.
    pub fn average(&self) -> DVector<f64> {
        self.coeff(0).map(|z| z.re)
    }

    /// Direct reconstruction `Σ_ℓ c_ℓ e^{iℓθ}`.
    pub fn eval(&self, theta: f64) -> DVector<f64> {
        let mut acc = DVector::<Complex64>::zeros(self.dim());
        for l in self.modes() {
            acc += self.coeff(l) * Complex64::from_polar(1.0, l as f64 * theta);
        }
        acc.map(|z| z.re)
    }

    /// `G_ν(θ,u) = Σ_{ℓ≠0} c_{νℓ}/(iℓ) e^{iℓθ}`.
    pub fn g_eval(&self, nu: i32, theta: f64) -> DVector<f64> {
        self.primitive(nu, theta, 1)
    }

    /// `H_ν(θ,u) = Σ_{ℓ≠0} c_{νℓ}/(iℓ)² e^{iℓθ}`.
    pub fn h_eval(&self, nu: i32, theta: f64) -> DVector<f64> {
        self.primitive(nu, theta, 2)
    }

    fn primitive(&self, nu: i32, theta: f64, order: i32) -> DVector<f64> {
        let mut acc = DVector::<Complex64>::zeros(self.dim());
        for l in self.modes().filter(|&l| l != 0) {
            let w = Complex64::from_polar(1.0, l as f64 * theta) / ie(l).powi(order);
            acc += self.coeff_nu(nu, l) * w;
        }
        acc.map(|z| z.re)
    }

    /// `∂_u ⟨F⟩(u)`.
    pub fn d2_average(&self) -> DMatrix<f64> {
        self.jac_coeff(0).map(|z| z.re)
    }

    /// `∂_u G_ν(θ,u)`.
    pub fn d2_g(&self, nu: i32, theta: f64) -> DMatrix<f64> {
        let d = self.dim();
        let mut acc = DMatrix::<Complex64>::zeros(d, d);
        for l in self.modes().filter(|&l| l != 0) {
            let w = Complex64::from_polar(1.0, l as f64 * theta) / ie(l);
            acc += self.jac_coeff(nu as i64 * l) * w;
        }
        acc.map(|z| z.re)
    }

    /// `⟨∂₂G₁ F⟩(u) = Σ_{ℓ≠0} (∂_u c_ℓ/(iℓ)) c_{-ℓ}`.
    pub fn bracket_d2g_f(&self) -> DVector<f64> {
        let mut acc = DVector::<Complex64>::zeros(self.dim());
        for l in self.modes().filter(|&l| l != 0) {
            acc += (self.jac_coeff(l) * self.coeff(-l)) / ie(l);
        }
        acc.map(|z| z.re)
    }

    /// `Σ_{ℓ≠0} |c_ℓ|²`, the θ-variance of F (Parseval).
    pub fn oscillation_energy(&self) -> f64 {
        self.modes().filter(|&l| l != 0).map(|l| self.coeff(l).norm_squared()).sum()
    }
}

/// Sampling context: the θ grid with its rotation matrices, shared by all tables of a
/// problem.
#[derive(Clone)]
pub struct Spectral {
    problem: ProblemSpec,
    cfg: SpectralConfig,
    rot: Vec<DMatrix<f64>>,
    roots: Vec<Complex64>,
}

impl Spectral {
    pub fn new(problem: &ProblemSpec, cfg: SpectralConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.samples;
        let rot = (0..n).map(|j| problem.rotation().matrix(2.0 * PI * j as f64 / n as f64)).collect();
        let roots = (0..n).map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / n as f64)).collect();
        Ok(Spectral { problem: problem.clone(), cfg, rot, roots })
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn config(&self) -> &SpectralConfig {
        &self.cfg
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.cfg.samples as f64
    }

    // e^{-θ_j A} = e^{θ_{N-j} A}
    fn rot_inv(&self, j: usize) -> &DMatrix<f64> {
        &self.rot[(self.cfg.samples - j) % self.cfg.samples]
    }

    fn sample(&self, j: usize, u: &DVector<f64>) -> DVector<f64> {
        let v = &self.rot[j] * u;
        self.rot_inv(j) * self.problem.field().eval(&v)
    }

    fn sample_jac(&self, j: usize, u: &DVector<f64>) -> DMatrix<f64> {
        let v = &self.rot[j] * u;
        self.rot_inv(j) * self.problem.field_jacobian(&v) * &self.rot[j]
    }

    /// `⟨F⟩(u)` by the trapezoidal rule on the θ grid.
    pub fn average(&self, u: &DVector<f64>) -> DVector<f64> {
        let n = self.cfg.samples;
        let mut acc = DVector::zeros(u.len());
        for j in 0..n {
            acc += self.sample(j, u);
        }
        acc / n as f64
    }

    /// `∂_u ⟨F⟩(u)` by the trapezoidal rule on the θ grid.
    pub fn average_jacobian(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let n = self.cfg.samples;
        let mut acc = DMatrix::zeros(u.len(), u.len());
        for j in 0..n {
            acc += self.sample_jac(j, u);
        }
        acc / n as f64
    }

    /// Coefficient table at `u` (values only).
    pub fn table(&self, u: &DVector<f64>) -> Result<FourierTable> {
        self.build(u, false)
    }

    /// Coefficient table at `u` including the coefficients of `∂₂F`.
    pub fn table_with_jacobian(&self, u: &DVector<f64>) -> Result<FourierTable> {
        self.build(u, true)
    }

    fn build(&self, u: &DVector<f64>, with_jac: bool) -> Result<FourierTable> {
        let n = self.cfg.samples;
        let big_l = self.cfg.max_mode;
        let d = u.len();
        let values: Vec<DVector<f64>> = (0..n).map(|j| self.sample(j, u)).collect();
        let mut coeffs = vec![DVector::<Complex64>::zeros(d); 2 * big_l + 1];
        for l in 0..=big_l {
            let mut acc = DVector::<Complex64>::zeros(d);
            for (j, f) in values.iter().enumerate() {
                let w = self.roots[(l * j) % n];
                for i in 0..d {
                    acc[i] += w * f[i];
                }
            }
            acc /= Complex64::new(n as f64, 0.0);
            coeffs[big_l - l] = acc.map(|z| z.conj());
            coeffs[big_l + l] = acc;
        }
        coeffs[big_l] = coeffs[big_l].map(|z| Complex64::new(z.re, 0.0));

        let mut residual: f64 = 0.0;
        let mut fmax: f64 = 0.0;
        for (j, f) in values.iter().enumerate() {
            let mut rec = coeffs[big_l].map(|z| z.re);
            for l in 1..=big_l {
                // c_ℓ e^{iℓθ} + conj = 2 Re(c_ℓ e^{iℓθ})
                let w = self.roots[(l * j) % n].conj();
                for i in 0..d {
                    rec[i] += 2.0 * (coeffs[big_l + l][i] * w).re;
                }
            }
            residual = residual.max((f - rec).norm());
            fmax = fmax.max(f.norm());
        }
        let tolerance = self.cfg.tail_tol * (1.0 + fmax);
        if residual > tolerance {
            return Err(Error::InsufficientModes { residual, tolerance });
        }

        let jac = if with_jac {
            let mats: Vec<DMatrix<f64>> = (0..n).map(|j| self.sample_jac(j, u)).collect();
            let mut out = vec![DMatrix::<Complex64>::zeros(d, d); 2 * big_l + 1];
            for l in 0..=big_l {
                let mut acc = DMatrix::<Complex64>::zeros(d, d);
                for (j, m) in mats.iter().enumerate() {
                    let w = self.roots[(l * j) % n];
                    for (a, b) in acc.iter_mut().zip(m.iter()) {
                        *a += w * *b;
                    }
                }
                acc /= Complex64::new(n as f64, 0.0);
                out[big_l - l] = acc.map(|z| z.conj());
                out[big_l + l] = acc;
            }
            out[big_l] = out[big_l].map(|z| Complex64::new(z.re, 0.0));
            Some(out)
        } else {
            None
        };

        Ok(FourierTable { u: u.clone(), max_mode: big_l, samples: n, coeffs, jac, residual })
    }
}
