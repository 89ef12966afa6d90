//! Per-mode tail kernel `E_p(ℓ,s) = ∫_s^∞ σ^{-p/(p+1)} e^{iℓσ} dσ` and the Ω operator.

use super::fresnel::tail_e1;
use crate::error::{Error, Result};
use crate::quad::adaptive;
use crate::spectral::FourierTable;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use statrs::function::gamma::gamma;
use std::f64::consts::FRAC_PI_2;

/// `E_p(ℓ,s)` for `ℓ ≠ 0`, `s ≥ 0`.
///
/// p = 1 uses the erf closed form; p ≥ 2 uses [`tail_e_contour`].
pub fn tail_e(p: u32, l: i64, s: f64) -> Result<Complex64> {
    check_args(p, l, s)?;
    if p == 1 {
        Ok(tail_e1(l, s))
    } else {
        Ok(contour(p, l, s))
    }
}

/// `E_p(ℓ,s)` by rotating the integration path onto `σ = s + i t·sign(ℓ)`:
/// `E_p(ℓ,s) = (i/ℓ) e^{iℓs} ∫_0^∞ (s + iy/ℓ)^{-α} e^{-y} dy`, `α = p/(p+1)`,
/// with `Γ(1-α) e^{iπ(1-α)/2} ℓ^{α-1}` at `s = 0`. Valid for every p ≥ 1.
pub fn tail_e_contour(p: u32, l: i64, s: f64) -> Result<Complex64> {
    check_args(p, l, s)?;
    Ok(contour(p, l, s))
}

fn check_args(p: u32, l: i64, s: f64) -> Result<()> {
    if l == 0 {
        return Err(Error::Domain("E_p(0, s) diverges; mode 0 has no tail kernel".into()));
    }
    if p == 0 {
        return Err(Error::Domain("p must be >= 1".into()));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("tail kernel needs finite s >= 0, got {s}")));
    }
    Ok(())
}

fn contour(p: u32, l: i64, s: f64) -> Complex64 {
    let alpha = p as f64 / (p + 1) as f64;
    let la = l.unsigned_abs() as f64;
    let v = if s == 0.0 {
        Complex64::from_polar(gamma(1.0 - alpha) * la.powf(alpha - 1.0), FRAC_PI_2 * (1.0 - alpha))
    } else {
        let integrand = |y: f64| Complex64::new(s, y / la).powf(-alpha) * (-y).exp();
        // e^{-y} < 1e-19 beyond y = 44
        let r = adaptive(integrand, 0.0, 44.0, 1e-300, 1e-15, 400);
        Complex64::new(0.0, 1.0 / la) * Complex64::from_polar(1.0, la * s) * r.value
    };
    if l > 0 {
        v
    } else {
        v.conj()
    }
}

/// Kernel values `E_p(ℓ,s)` for the active modes of a table.
fn kernel_values(p: u32, table: &FourierTable, s: f64) -> Result<Vec<(i64, Complex64)>> {
    table.active_modes().into_iter().map(|l| Ok((l, tail_e(p, l, s)?))).collect()
}

/// `Ω_ν(s,u) = Σ_{ℓ≠0} c_{νℓ}(u) E_p(ℓ,s)`.
pub fn omega(table: &FourierTable, p: u32, nu: i32, s: f64) -> Result<DVector<f64>> {
    let mut acc = DVector::<Complex64>::zeros(table.dim());
    for (l, e) in kernel_values(p, table, s)? {
        acc += table.coeff_nu(nu, l) * e;
    }
    Ok(acc.map(|z| z.re))
}

/// `∂_u Ω_ν(s,u)`; the table must carry Jacobian coefficients.
pub fn d2_omega(table: &FourierTable, p: u32, nu: i32, s: f64) -> Result<DMatrix<f64>> {
    let d = table.dim();
    let mut acc = DMatrix::<Complex64>::zeros(d, d);
    for (l, e) in kernel_values(p, table, s)? {
        acc += table.jac_coeff(nu as i64 * l) * e;
    }
    Ok(acc.map(|z| z.re))
}
