//! Fresnel-type primitives for the quadratic phase `ℓ(ξ-t0)²/ε`.

use super::faddeeva::faddeeva;
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// `e^{iπ/4}`.
const ROT: Complex64 = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);

/// Slowly varying envelope of the Fresnel tail: `e^{-ix²} ∫_x^∞ e^{is²} ds` for `x ≥ 0`.
///
/// Equals `(√π/2) e^{iπ/4} w(e^{iπ/4} x)`; it behaves like `i/(2x)` for large `x`.
pub fn fresnel_envelope(x: f64) -> Complex64 {
    debug_assert!(x >= 0.0);
    ROT * faddeeva(ROT * x) * (0.5 * PI.sqrt())
}

/// `∫_x^∞ e^{is²} ds` for `x ≥ 0`, with the phase `x²` supplied by the caller.
fn fresnel_tail_with_phase(x: f64, phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase) * fresnel_envelope(x)
}

/// `∫_x^∞ e^{is²} ds` for `x ≥ 0`.
pub fn fresnel_tail(x: f64) -> Complex64 {
    fresnel_tail_with_phase(x, x * x)
}

/// Envelope of the per-mode kernel for p = 1: `e^{-iℓσ} E_1(ℓ,σ)`, `ℓ ≠ 0`, `σ ≥ 0`.
pub fn e1_envelope(l: i64, sigma: f64) -> Complex64 {
    let la = l.unsigned_abs() as f64;
    let v = fresnel_envelope((la * sigma).sqrt()) * (2.0 / la.sqrt());
    if l > 0 {
        v
    } else {
        v.conj()
    }
}

/// `E_1(ℓ,s) = ∫_s^∞ σ^{-1/2} e^{iℓσ} dσ = 2 ∫_{√s}^∞ e^{iℓr²} dr`.
pub fn tail_e1(l: i64, s: f64) -> Complex64 {
    Complex64::from_polar(1.0, l as f64 * s) * e1_envelope(l, s)
}

/// The phase `τ(ξ) = (ξ-t0)²/ε` of the p = 1 problem and its exact step integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticPhase {
    pub eps: f64,
    pub t0: f64,
}

impl QuadraticPhase {
    pub fn new(eps: f64, t0: f64) -> Self {
        QuadraticPhase { eps, t0 }
    }

    pub fn tau(&self, xi: f64) -> f64 {
        let d = xi - self.t0;
        d * d / self.eps
    }

    /// `∫_{x_a}^{x_b} e^{ix²} dx` where `x = (ξ-t0)√(|ℓ|/ε)`, passing phases explicitly.
    fn fresnel_segment(&self, la: f64, a: f64, b: f64) -> Complex64 {
        let scale = (la / self.eps).sqrt();
        let (da, db) = (a - self.t0, b - self.t0);
        let (xa, xb) = (da * scale, db * scale);
        let (pa, pb) = (la * da * da / self.eps, la * db * db / self.eps);
        let tail = |x: f64, ph: f64| fresnel_tail_with_phase(x.abs(), ph);
        if xa >= 0.0 && xb >= 0.0 {
            tail(xa, pa) - tail(xb, pb)
        } else if xa <= 0.0 && xb <= 0.0 {
            tail(xb, pb) - tail(xa, pa)
        } else {
            // straddles t0: ∫_{xa}^0 + ∫_0^{xb}, orientation from the sign of xb
            let t_zero = fresnel_tail(0.0);
            let s = if xb > xa { 1.0 } else { -1.0 };
            (2.0 * t_zero - tail(xa, pa) - tail(xb, pb)) * s
        }
    }

    /// `P0(ℓ; a, b) = ∫_a^b e^{iℓ(ξ-t0)²/ε} dξ`.
    pub fn p0(&self, l: i64, a: f64, b: f64) -> Complex64 {
        if l == 0 {
            return Complex64::new(b - a, 0.0);
        }
        let la = l.unsigned_abs() as f64;
        let v = self.fresnel_segment(la, a, b) * (self.eps / la).sqrt();
        if l > 0 {
            v
        } else {
            v.conj()
        }
    }

    /// `P1(ℓ; a, b, t_ref) = ∫_a^b (ξ - t_ref) e^{iℓ(ξ-t0)²/ε} dξ`.
    pub fn p1(&self, l: i64, a: f64, b: f64, t_ref: f64) -> Complex64 {
        if l == 0 {
            let (ea, eb) = (a - t_ref, b - t_ref);
            return Complex64::new(0.5 * (eb * eb - ea * ea), 0.0);
        }
        let lf = l as f64;
        let da = a - self.t0;
        let phase_a = lf * da * da / self.eps;
        // e^{iφ_b} - e^{iφ_a} = e^{iφ_a}(e^{iδ} - 1) with δ formed without cancellation
        let delta = lf * (b - a) * (b + a - 2.0 * self.t0) / self.eps;
        let half = (0.5 * delta).sin();
        let expm1 = Complex64::new(-2.0 * half * half, delta.sin());
        let antider = Complex64::from_polar(1.0, phase_a) * expm1 * (self.eps / (2.0 * lf)) * Complex64::new(0.0, -1.0);
        antider + self.p0(l, a, b) * (self.t0 - t_ref)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_at_zero_is_half_gaussian_normalisation() {
        let t = fresnel_tail(0.0);
        let expect = ROT * (0.5 * PI.sqrt());
        assert!((t - expect).norm() < 1e-15);
    }

    #[test]
    fn envelope_large_argument_asymptote() {
        let x = 400.0;
        let e = fresnel_envelope(x);
        let asym = Complex64::new(1.0 / (4.0 * x * x * x), 1.0 / (2.0 * x));
        assert!((e - asym).norm() < 1e-11);
    }

    #[test]
    fn p0_zero_mode_is_length() {
        let q = QuadraticPhase::new(0.1, 0.3);
        assert_eq!(q.p0(0, 0.25, 0.75), Complex64::new(0.5, 0.0));
    }
}
