//! Problem definition: `U' = (γ(t)/ε) A U + f(U)` with `γ(t) = (p+1)(t-t0)^p`, the
//! rotation action `e^{θA}`, the filtering transform and the rescaled time `Γ`.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// The nonlinearity `f`. Implementors may supply an analytic Jacobian; otherwise central
/// finite differences are used.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, u: &DVector<f64>) -> DVector<f64>;
    fn jacobian(&self, _u: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }
}

type FieldFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
type JacFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// A vector field assembled from closures.
pub struct FnField {
    dim: usize,
    f: Box<FieldFn>,
    jac: Option<Box<JacFn>>,
}

impl FnField {
    pub fn new(dim: usize, f: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static) -> Self {
        FnField { dim, f: Box::new(f), jac: None }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.jac = Some(Box::new(jac));
        self
    }
}

impl VectorField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, u: &DVector<f64>) -> DVector<f64> {
        (self.f)(u)
    }
    fn jacobian(&self, u: &DVector<f64>) -> Option<DMatrix<f64>> {
        self.jac.as_ref().map(|j| j(u))
    }
}

/// Central-difference Jacobian with step `eps_mach^{1/3} (1 + |u|)`.
pub fn fd_jacobian(f: &dyn Fn(&DVector<f64>) -> DVector<f64>, u: &DVector<f64>) -> DMatrix<f64> {
    let d = u.len();
    let h = f64::EPSILON.cbrt() * (1.0 + u.norm());
    let mut jac = DMatrix::zeros(d, d);
    let mut v = u.clone();
    for j in 0..d {
        v[j] = u[j] + h;
        let fp = f(&v);
        v[j] = u[j] - h;
        let fm = f(&v);
        v[j] = u[j];
        jac.set_column(j, &((fp - fm) / (2.0 * h)));
    }
    jac
}

/// `e^{θA}` for a real diagonalizable `A` whose eigenvalues lie in `iℤ`.
///
/// Stored as `Π_0 + Σ_{ℓ>0} (cos ℓθ C_ℓ + sin ℓθ S_ℓ)` where `Π_ℓ` are the spectral
/// projectors, `C_ℓ = 2 Re Π_ℓ` and `S_ℓ = -2 Im Π_ℓ`; this is exactly 2π-periodic.
#[derive(Debug, Clone)]
pub struct RotationAction {
    dim: usize,
    frequencies: Vec<i64>,
    pi0: DMatrix<f64>,
    modes: Vec<(i64, DMatrix<f64>, DMatrix<f64>)>,
    reconstruction_error: f64,
}

impl RotationAction {
    pub const RESONANCE_TOL: f64 = 1e-9;

    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let d = a.nrows();
        if d == 0 || a.ncols() != d {
            return Err(Error::InvalidProblem(format!("A must be square and nonempty, got {}x{}", a.nrows(), a.ncols())));
        }
        let scale = a.norm().max(1.0);
        let tol = Self::RESONANCE_TOL * scale;
        let eig = a.clone().complex_eigenvalues();
        let mut frequencies = Vec::with_capacity(d);
        for lam in eig.iter() {
            let l = lam.im.round();
            if lam.re.abs() > tol || (lam.im - l).abs() > tol {
                return Err(Error::NonResonant(format!("eigenvalue {lam} is not in iZ")));
            }
            frequencies.push(l as i64);
        }
        frequencies.sort_unstable();
        let mut distinct = frequencies.clone();
        distinct.dedup();

        let ac = a.map(|x| Complex64::new(x, 0.0));
        let eye = DMatrix::<Complex64>::identity(d, d);
        let mut projectors = BTreeMap::new();
        for &l in &distinct {
            let mut p = eye.clone();
            for &k in &distinct {
                if k != l {
                    let factor = (&ac - &eye * Complex64::new(0.0, k as f64)) / Complex64::new(0.0, (l - k) as f64);
                    p = factor * p;
                }
            }
            projectors.insert(l, p);
        }

        let mut recon = DMatrix::<Complex64>::zeros(d, d);
        let mut worst: f64 = 0.0;
        for (&l, p) in &projectors {
            let il = Complex64::new(0.0, l as f64);
            recon += p * il;
            worst = worst.max((&ac * p - p * il).norm());
        }
        let reconstruction_error = (recon - &ac).norm().max(worst);
        if reconstruction_error > tol {
            return Err(Error::NonResonant(format!(
                "A is not diagonalizable (spectral reconstruction error {reconstruction_error:.3e})"
            )));
        }
        for &l in &distinct {
            if !projectors.contains_key(&-l) {
                return Err(Error::NonResonant(format!("frequency {l} has no conjugate partner")));
            }
        }

        let pi0 = projectors.get(&0).map(|p| p.map(|z| z.re)).unwrap_or_else(|| DMatrix::zeros(d, d));
        let modes = projectors
            .iter()
            .filter(|(&l, _)| l > 0)
            .map(|(&l, p)| (l, p.map(|z| 2.0 * z.re), p.map(|z| -2.0 * z.im)))
            .collect();
        Ok(RotationAction { dim: d, frequencies, pi0, modes, reconstruction_error })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Eigenfrequencies ℓ_j (eigenvalues are iℓ_j), sorted.
    pub fn frequencies(&self) -> &[i64] {
        &self.frequencies
    }

    pub fn reconstruction_error(&self) -> f64 {
        self.reconstruction_error
    }

    /// Dense matrix `e^{θA}`.
    pub fn matrix(&self, theta: f64) -> DMatrix<f64> {
        let mut m = self.pi0.clone();
        for (l, c, s) in &self.modes {
            let (sn, cs) = (*l as f64 * theta).sin_cos();
            m += c * cs + s * sn;
        }
        m
    }

    /// `e^{θA} x`.
    pub fn rotate(&self, theta: f64, x: &DVector<f64>) -> DVector<f64> {
        let mut y = &self.pi0 * x;
        for (l, c, s) in &self.modes {
            let (sn, cs) = (*l as f64 * theta).sin_cos();
            y += (c * x) * cs + (s * x) * sn;
        }
        y
    }
}

/// Rescaled time `s = Γ(t)` and its inverse.
#[derive(Debug, Clone, Copy)]
pub struct TimeMaps {
    pub p: u32,
    pub t0: f64,
    pub horizon: f64,
    pub s0: f64,
    pub s_end: f64,
}

impl TimeMaps {
    pub fn new(p: u32, t0: f64, horizon: f64) -> Self {
        let q = (p + 1) as i32;
        TimeMaps { p, t0, horizon, s0: t0.powi(q), s_end: (horizon - t0).powi(q) + t0.powi(q) }
    }

    /// `γ(t) = (p+1)(t-t0)^p`.
    pub fn gamma(&self, t: f64) -> f64 {
        (self.p + 1) as f64 * (t - self.t0).powi(self.p as i32)
    }

    /// `μ_t = sign(t - t0)^p`.
    pub fn mu_t(&self, t: f64) -> f64 {
        let s: f64 = if t < self.t0 { -1.0 } else { 1.0 };
        s.powi(self.p as i32)
    }

    /// `Γ(t) = t0^{p+1} + sign(t-t0)|t-t0|^{p+1}`.
    pub fn big_gamma(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, {}]", self.horizon)));
        }
        let d = t - self.t0;
        Ok(self.s0 + d.signum() * d.abs().powi((self.p + 1) as i32))
    }

    pub fn big_gamma_inv(&self, s: f64) -> Result<f64> {
        if !(0.0..=self.s_end).contains(&s) {
            return Err(Error::Domain(format!("s = {s} outside [0, {}]", self.s_end)));
        }
        let d = s - self.s0;
        Ok(self.t0 + d.signum() * d.abs().powf(1.0 / (self.p + 1) as f64))
    }
}

/// The full oscillatory problem.
#[derive(Clone)]
pub struct ProblemSpec {
    name: String,
    a: DMatrix<f64>,
    field: Arc<dyn VectorField>,
    p: u32,
    t0: f64,
    horizon: f64,
    eps: f64,
    u0: DVector<f64>,
    rotation: Arc<RotationAction>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("p", &self.p)
            .field("t0", &self.t0)
            .field("horizon", &self.horizon)
            .field("eps", &self.eps)
            .field("u0", &self.u0.as_slice())
            .finish()
    }
}

impl ProblemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        a: DMatrix<f64>,
        field: Arc<dyn VectorField>,
        p: u32,
        t0: f64,
        horizon: f64,
        eps: f64,
        u0: DVector<f64>,
    ) -> Result<Self> {
        let d = a.nrows();
        if field.dim() != d || u0.len() != d {
            return Err(Error::InvalidProblem(format!(
                "dimension mismatch: A is {d}x{d}, f has dim {}, U0 has {}",
                field.dim(),
                u0.len()
            )));
        }
        if p < 1 {
            return Err(Error::InvalidProblem("p must be >= 1".into()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidProblem(format!("T must be positive, got {horizon}")));
        }
        if !(0.0..=horizon).contains(&t0) {
            return Err(Error::InvalidProblem(format!("t0 = {t0} outside [0, {horizon}]")));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidProblem(format!("eps must lie in (0, 1], got {eps}")));
        }
        let rotation = Arc::new(RotationAction::new(&a)?);
        Ok(ProblemSpec { name: name.into(), a, field, p, t0, horizon, eps, u0, rotation })
    }

    /// Same problem at a different ε.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidProblem(format!("eps must lie in (0, 1], got {eps}")));
        }
        Ok(ProblemSpec { eps, ..self.clone() })
    }

    /// Same problem with a different vanishing instant and horizon.
    pub fn with_times(&self, t0: f64, horizon: f64) -> Result<Self> {
        Self::new(self.name.clone(), self.a.clone(), self.field.clone(), self.p, t0, horizon, self.eps, self.u0.clone())
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn field(&self) -> &dyn VectorField {
        self.field.as_ref()
    }
    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn u0(&self) -> &DVector<f64> {
        &self.u0
    }
    pub fn rotation(&self) -> &RotationAction {
        &self.rotation
    }
    pub fn time_maps(&self) -> TimeMaps {
        TimeMaps::new(self.p, self.t0, self.horizon)
    }

    /// `μ = (-1)^p`.
    pub fn mu(&self) -> i32 {
        if self.p.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Fast phase `θ(t) = (t-t0)^{p+1}/ε` (signed).
    pub fn theta(&self, t: f64) -> f64 {
        (t - self.t0).powi((self.p + 1) as i32) / self.eps
    }

    /// Rescaled distance to the vanishing instant, `τ = |t-t0|^{p+1}/ε`.
    pub fn tau(&self, t: f64) -> f64 {
        (t - self.t0).abs().powi((self.p + 1) as i32) / self.eps
    }

    pub fn gamma(&self, t: f64) -> f64 {
        self.time_maps().gamma(t)
    }

    /// Unfiltered right-hand side `(γ(t)/ε) A U + f(U)`.
    pub fn raw_rhs(&self, t: f64, u: &DVector<f64>) -> DVector<f64> {
        (&self.a * u) * (self.gamma(t) / self.eps) + self.field.eval(u)
    }

    /// `F(θ,u) = e^{-θA} f(e^{θA} u)`.
    pub fn filtered_field(&self, theta: f64, u: &DVector<f64>) -> DVector<f64> {
        let v = self.rotation.rotate(theta, u);
        self.rotation.rotate(-theta, &self.field.eval(&v))
    }

    /// Jacobian of `f`, analytic when available.
    pub fn field_jacobian(&self, v: &DVector<f64>) -> DMatrix<f64> {
        match self.field.jacobian(v) {
            Some(j) => j,
            None => fd_jacobian(&|x| self.field.eval(x), v),
        }
    }

    /// `∂_u F(θ,u) = e^{-θA} Df(e^{θA}u) e^{θA}`.
    pub fn filtered_jacobian(&self, theta: f64, u: &DVector<f64>) -> DMatrix<f64> {
        let r = self.rotation.matrix(theta);
        let rinv = self.rotation.matrix(-theta);
        let v = &r * u;
        rinv * self.field_jacobian(&v) * r
    }

    /// `u = e^{-θ(t)A} U`.
    pub fn filter(&self, t: f64, big_u: &DVector<f64>) -> DVector<f64> {
        self.rotation.rotate(-self.theta(t), big_u)
    }

    /// `U = e^{θ(t)A} u`.
    pub fn unfilter(&self, t: f64, u: &DVector<f64>) -> DVector<f64> {
        self.rotation.rotate(self.theta(t), u)
    }

    /// `u_0^ε = exp(-((-t0)^{p+1}/ε) A) U_0`.
    pub fn initial_filtered(&self) -> DVector<f64> {
        let e = (-self.t0).powi((self.p + 1) as i32) / self.eps;
        self.rotation.rotate(-e, &self.u0)
    }

    /// Monitor bound `2M` with `M = 4 max(1, |U_0|)`.
    pub fn solution_bound(&self) -> f64 {
        8.0 * self.u0.norm().max(1.0)
    }

    pub fn check_bound(&self, t: f64, u: &DVector<f64>) -> Result<()> {
        let norm = u.norm();
        let bound = self.solution_bound();
        if norm.is_finite() && norm <= bound {
            Ok(())
        } else {
            Err(Error::BoundExceeded { t, norm, bound })
        }
    }
}

/// Hénon–Heiles field in the variables `U = (q1, q2, p1, p2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HenonHeiles;

impl VectorField for HenonHeiles {
    fn dim(&self) -> usize {
        4
    }
    fn eval(&self, u: &DVector<f64>) -> DVector<f64> {
        let (q1, q2, p2) = (u[0], u[1], u[3]);
        DVector::from_vec(vec![0.0, p2, -2.0 * q1 * q2, -q2 - q1 * q1 + q2 * q2])
    }
    fn jacobian(&self, u: &DVector<f64>) -> Option<DMatrix<f64>> {
        let (q1, q2) = (u[0], u[1]);
        #[rustfmt::skip]
        let j = DMatrix::from_row_slice(4, 4, &[
            0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            -2.0 * q2, -2.0 * q1, 0.0, 0.0,
            -2.0 * q1, -1.0 + 2.0 * q2, 0.0, 0.0,
        ]);
        Some(j)
    }
}

/// Generator of the rotation `(q1, p1) -> (q1 cos θ + p1 sin θ, -q1 sin θ + p1 cos θ)`.
pub fn henon_heiles_matrix() -> DMatrix<f64> {
    let mut a = DMatrix::zeros(4, 4);
    a[(0, 2)] = 1.0;
    a[(2, 0)] = -1.0;
    a
}

/// Hénon–Heiles benchmark: p = 1, t0 = 1/3, T = 1, U0 = (0.9, 0.6, 0.8, 0.5).
pub fn builtin_henon_heiles(eps: f64) -> Result<ProblemSpec> {
    ProblemSpec::new(
        "henon-heiles",
        henon_heiles_matrix(),
        Arc::new(HenonHeiles),
        1,
        1.0 / 3.0,
        1.0,
        eps,
        DVector::from_vec(vec![0.9, 0.6, 0.8, 0.5]),
    )
}

/// Planar rotor `z = x + iy` driven by a quadratic nonlinearity.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rotor;

impl VectorField for Rotor {
    fn dim(&self) -> usize {
        2
    }
    fn eval(&self, u: &DVector<f64>) -> DVector<f64> {
        let (x, y) = (u[0], u[1]);
        DVector::from_vec(vec![y * y - 0.3 * x, x * y + 0.5])
    }
    fn jacobian(&self, u: &DVector<f64>) -> Option<DMatrix<f64>> {
        let (x, y) = (u[0], u[1]);
        Some(DMatrix::from_row_slice(2, 2, &[-0.3, 2.0 * y, y, x]))
    }
}

/// Two-dimensional rotor with multiplicity `p`: t0 = 1/3, T = 1, U0 = (1, 0.5).
pub fn builtin_rotor(p: u32, eps: f64) -> Result<ProblemSpec> {
    ProblemSpec::new(
        format!("rotor-p{p}"),
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
        Arc::new(Rotor),
        p,
        1.0 / 3.0,
        1.0,
        eps,
        DVector::from_vec(vec![1.0, 0.5]),
    )
}

/// Overrides applied when instantiating a named problem.
#[derive(Debug, Clone, Copy)]
pub struct ProblemParams {
    pub eps: f64,
    pub t0: Option<f64>,
    pub horizon: Option<f64>,
}

impl ProblemParams {
    pub fn new(eps: f64) -> Self {
        ProblemParams { eps, t0: None, horizon: None }
    }
}

type Builder = dyn Fn(f64) -> Result<ProblemSpec> + Send + Sync;

/// Named problem constructors. Builtins: `henon-heiles`, `rotor-p1`, `rotor-p2`.
pub struct ProblemRegistry {
    builders: BTreeMap<String, Box<Builder>>,
}

impl Default for ProblemRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl ProblemRegistry {
    pub fn empty() -> Self {
        ProblemRegistry { builders: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("henon-heiles", builtin_henon_heiles);
        r.register("rotor-p1", |eps| builtin_rotor(1, eps));
        r.register("rotor-p2", |eps| builtin_rotor(2, eps));
        r
    }

    /// Registers a constructor taking ε.
    pub fn register(&mut self, name: &str, builder: impl Fn(f64) -> Result<ProblemSpec> + Send + Sync + 'static) {
        self.builders.insert(name.to_string(), Box::new(builder));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.builders.contains_key(name)
    }

    pub fn build(&self, name: &str, params: &ProblemParams) -> Result<ProblemSpec> {
        let builder = self
            .builders
            .get(name)
            .ok_or_else(|| Error::Unknown { kind: "problem", name: name.to_string() })?;
        let base = builder(params.eps)?;
        if params.t0.is_some() || params.horizon.is_some() {
            base.with_times(params.t0.unwrap_or(base.t0()), params.horizon.unwrap_or(base.horizon()))
        } else {
            Ok(base)
        }
    }
}
