//! Kernel checks against independent oracles (closed forms, direct quadrature).

#![allow(clippy::excessive_precision)]

use crate::error::Result;
use crate::kernels::{
    erf_complex, field_integral, omega, step_omega_integrals, tail_e, tail_e_contour, OmegaStrategy, QuadraticPhase,
    StepInput,
};
use crate::problem::{builtin_henon_heiles, FnField, ProblemSpec};
use crate::quad::{adaptive, gauss_legendre};
use crate::spectral::{Spectral, SpectralConfig};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::sync::Arc;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCheck {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
}

impl KernelCheck {
    fn new(name: impl Into<String>, error: f64, tolerance: f64) -> Self {
        KernelCheck { name: name.into(), error, tolerance }
    }

    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

impl fmt::Display for KernelCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {:<44} error {:.3e} (tol {:.1e})", self.name, self.error, self.tolerance)
    }
}

fn rel(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm().max(1e-300)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn erf_checks(out: &mut Vec<KernelCheck>) {
    // 30-digit values
    let table = [
        (c(0.5, 0.0), c(0.520499877813046537682746653892, 0.0)),
        (c(1.0, 0.0), c(0.842700792949714869341220635083, 0.0)),
        (c(3.0, 0.0), c(0.99997790950300141455862722387, 0.0)),
        (c(1.0, 1.0), c(1.31615128169794764488027108024, 0.190453469237834686284108861969)),
        (c(-2.0, 0.5), c(-1.00350224331303634721103571606, 0.00474090303129433610447208926142)),
        (c(0.3, -4.0), c(865230.158570568183625551912107, 804043.169789466455344773264745)),
    ];
    let err = table.iter().map(|&(z, w)| rel(erf_complex(z), w)).fold(0.0, f64::max);
    out.push(KernelCheck::new("erf at reference points", err, 1e-13));
}

/// `∫_s^∞ σ^{-α} e^{iσ} dσ` by Gauss–Kronrod on `[s, X]` plus an asymptotic tail from
/// repeated integration by parts.
fn tail_oracle(alpha: f64, s: f64) -> Complex64 {
    let x = 2000.0;
    let body = adaptive(|t| Complex64::from_polar(t.powf(-alpha), t), s, x, 1e-16, 1e-14, 20_000).value;
    // ∫_X^∞ g e^{iσ} = e^{iX} Σ_k i^{k+1} g^{(k)}(X)
    let mut tail = c(0.0, 0.0);
    let mut deriv = x.powf(-alpha);
    let mut ik = c(0.0, 1.0);
    for k in 0..8 {
        tail += ik * deriv;
        deriv *= (-alpha - k as f64) / x;
        ik *= c(0.0, 1.0);
    }
    body + Complex64::from_polar(1.0, x) * tail
}

fn tail_checks(out: &mut Vec<KernelCheck>) -> Result<()> {
    let want = Complex64::from_polar(PI.sqrt(), FRAC_PI_4);
    out.push(KernelCheck::new("E_1(1,0) closed form", rel(tail_e(1, 1, 0.0)?, want), 1e-14));
    out.push(KernelCheck::new("E_1(1,0) rotated contour", rel(tail_e_contour(1, 1, 0.0)?, want), 1e-14));
    let mut e = 0.0_f64;
    for &(l, s) in &[(1_i64, 0.7), (1, 10.0), (1, 40.0)] {
        e = e.max(rel(tail_e(1, l, s)?, tail_oracle(0.5, s)));
    }
    out.push(KernelCheck::new("E_1 against real-axis quadrature", e, 1e-10));
    let mut e = 0.0_f64;
    for &(p, s) in &[(2_u32, 10.0), (2, 1.5), (3, 4.0)] {
        let alpha = p as f64 / (p + 1) as f64;
        e = e.max(rel(tail_e(p, 1, s)?, tail_oracle(alpha, s)));
    }
    out.push(KernelCheck::new("E_p (p>=2) against real-axis quadrature", e, 1e-10));
    // conjugate symmetry and the scaling E_p(ℓ,s) = ℓ^{α-1} E_p(1,ℓs)
    let base = tail_e(2, 1, 6.0)?;
    let e = rel(tail_e(2, -3, 2.0)?, base.conj() * 3f64.powf(-1.0 / 3.0));
    out.push(KernelCheck::new("E_2 mode scaling and conjugation", e, 1e-12));
    Ok(())
}

/// Composite Gauss–Legendre with panels short enough that the phase turns by at most 2 rad.
fn direct(phase: &QuadraticPhase, l: i64, a: f64, b: f64, weight: impl Fn(f64) -> f64) -> Complex64 {
    let far = (a - phase.t0).abs().max((b - phase.t0).abs());
    let max_rate = 2.0 * l.abs() as f64 * far / phase.eps;
    let panels = ((b - a) * max_rate / 2.0).ceil().max(1.0) as usize;
    let rule = gauss_legendre(20);
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * width;
            rule.integrate(lo, lo + width, |x| Complex64::from_polar(weight(x), l as f64 * phase.tau(x)))
        })
        .sum()
}

fn fresnel_checks(out: &mut Vec<KernelCheck>, rng: &mut ChaCha8Rng) {
    let (mut e0, mut e1, mut eadd) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let eps = 2f64.powf(-rng.random_range(0.0..14.0));
        let t0 = rng.random_range(0.1..0.9);
        let phase = QuadraticPhase::new(eps, t0);
        let a = rng.random_range(0.0..0.95);
        let b = a + rng.random_range(1e-3..0.1);
        let mut l = rng.random_range(1..=8_i64);
        if rng.random_bool(0.5) {
            l = -l;
        }
        let scale = b - a;
        e0 = e0.max((phase.p0(l, a, b) - direct(&phase, l, a, b, |_| 1.0)).norm() / scale);
        e1 = e1.max((phase.p1(l, a, b, a) - direct(&phase, l, a, b, |x| x - a)).norm() / (scale * scale));
        let m = rng.random_range(a..b);
        eadd = eadd.max((phase.p0(l, a, b) - phase.p0(l, a, m) - phase.p0(l, m, b)).norm() / scale);
    }
    out.push(KernelCheck::new("P0 on 100 random cells", e0, 1e-10));
    out.push(KernelCheck::new("P1 on 100 random cells", e1, 1e-10));
    out.push(KernelCheck::new("P0 additivity", eadd, 1e-12));
}

/// Constant forcing of a unit rotor: `F(σ) = e^{∓σA} c` so `Ω₁(0) = ∫_0^∞ σ^{-1/2}(cos σ, ±sin σ) dσ`
/// has components of modulus `√(π/2)`.
fn constant_rotor_check(out: &mut Vec<KernelCheck>) -> Result<()> {
    let field = FnField::new(2, |_| DVector::from_vec(vec![1.0, 0.0]));
    let problem = ProblemSpec::new(
        "constant-rotor",
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
        Arc::new(field),
        1,
        0.5,
        1.0,
        0.1,
        DVector::from_vec(vec![0.0, 0.0]),
    )?;
    let spectral = Spectral::new(&problem, SpectralConfig::default())?;
    let table = spectral.table(problem.u0())?;
    let om = omega(&table, 1, 1, 0.0)?;
    let want = (0.5 * PI).sqrt();
    let err = om.iter().map(|x| (x.abs() - want).abs()).fold(0.0, f64::max);
    out.push(KernelCheck::new("Omega_1(0) of a constant-forced rotor", err, 1e-13));
    Ok(())
}

/// Direct quadrature of the two Ω-bearing step integrals from their definitions.
fn step_oracle(
    problem: &ProblemSpec,
    spectral: &Spectral,
    ubar: &DVector<f64>,
    bk: &DVector<f64>,
    a: f64,
    b: f64,
    frozen: bool,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let phase = QuadraticPhase::new(problem.eps(), problem.t0());
    let table = spectral.table_with_jacobian(ubar)?;
    let favg = table.average();
    let half = 0.5 * problem.eps().sqrt();
    let tau_a = phase.tau(a);
    let om_a = omega(&table, 1, 1, tau_a)?;
    let d2_a = crate::kernels::d2_omega(&table, 1, 1, tau_a)?;
    let d = ubar.len();
    let eval = |x: f64| -> (DVector<f64>, DVector<f64>) {
        let tau = phase.tau(x);
        let jac = problem.filtered_jacobian(tau, bk);
        let d2 = if frozen { d2_a.clone() } else { crate::kernels::d2_omega(&table, 1, 1, tau).expect("valid") };
        let deriv = &jac * (d2 * &favg) * ((x - a) * half);
        let diff = &jac * (omega(&table, 1, 1, tau).expect("valid") - &om_a) * half;
        (deriv, diff)
    };
    let mut deriv = DVector::zeros(d);
    let mut diff = DVector::zeros(d);
    for i in 0..d {
        deriv[i] = adaptive(|x| c(eval(x).0[i], 0.0), a, b, 1e-17, 1e-13, 4000).value.re;
        diff[i] = adaptive(|x| c(eval(x).1[i], 0.0), a, b, 1e-17, 1e-13, 4000).value.re;
    }
    Ok((deriv, diff))
}

fn step_checks(out: &mut Vec<KernelCheck>) -> Result<()> {
    let cases = [(2f64.powi(-4), 0.5, 0.025), (2f64.powi(-4), 0.2, 0.025), (2f64.powi(-10), 0.34, 0.025)];
    for &(eps, a, h) in &cases {
        let problem = builtin_henon_heiles(eps)?;
        let spectral = Spectral::new(&problem, SpectralConfig::default())?;
        let phase = QuadraticPhase::new(eps, problem.t0());
        let ubar = problem.initial_filtered();
        let bk = &ubar + DVector::from_vec(vec![0.01, -0.02, 0.015, 0.005]);
        let tu = spectral.table_with_jacobian(&ubar)?;
        let tb = spectral.table_with_jacobian(&bk)?;
        let favg = tu.average();
        for frozen in [false, true] {
            let (want_d, want_f) = step_oracle(&problem, &spectral, &ubar, &bk, a, a + h, frozen)?;
            for strategy in [OmegaStrategy::ModePair, OmegaStrategy::Filon] {
                let input = StepInput { a, b: a + h, ubar: &tu, bk: &tb, favg: &favg, frozen_derivative: frozen };
                let got = step_omega_integrals(&phase, &input, strategy)?;
                let err = (got.derivative_term - &want_d).amax().max((got.difference_term - &want_f).amax());
                let name = format!(
                    "step integrals {strategy} eps=2^{} [{a},{}]{}",
                    eps.log2().round(),
                    a + h,
                    if frozen { " frozen" } else { "" }
                );
                out.push(KernelCheck::new(name, err, 1e-8));
            }
        }
        // sanity of the smooth part: ∫ F(τ(ξ), u) dξ against direct quadrature
        let fi = field_integral(&phase, &tb, a, a + h);
        let mut err = 0.0_f64;
        for i in 0..bk.len() {
            let v = adaptive(|x| c(problem.filtered_field(phase.tau(x), &bk)[i], 0.0), a, a + h, 1e-17, 1e-14, 4000);
            err = err.max((v.value.re - fi[i]).abs());
        }
        out.push(KernelCheck::new(format!("field integral eps=2^{} at {a}", eps.log2().round()), err, 1e-10));
    }
    Ok(())
}

/// Runs every kernel check; `seed` drives the random cells.
pub fn verify_kernels(seed: u64) -> Result<Vec<KernelCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    erf_checks(&mut out);
    tail_checks(&mut out)?;
    fresnel_checks(&mut out, &mut rng);
    constant_rotor_check(&mut out)?;
    step_checks(&mut out)?;
    Ok(out)
}
