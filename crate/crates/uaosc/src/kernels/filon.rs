//! Legendre–Filon quadrature for `∫_{-1}^{1} e^{iκy} g(y) dy` with smooth `g`.
//!
//! `g` is sampled at Gauss–Legendre nodes, expanded in Legendre polynomials, and the
//! moments `∫ P_j(y) e^{iκy} dy = 2 i^j j_j(κ)` are taken exactly.

use crate::quad::{gauss_legendre, legendre_with_derivative};
use num_complex::Complex64;
use std::sync::OnceLock;

/// Spherical Bessel functions `j_0(x) .. j_{n-1}(x)`.
pub fn spherical_bessel_j(x: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    let ax = x.abs();
    if ax < 1.0 {
        // j_k(x) = x^k Σ_m (-x²/2)^m / (m! (2k+2m+1)!!)
        let mut xk_dfact = 1.0; // x^k / (2k+1)!!
        for (k, slot) in out.iter_mut().enumerate() {
            if k > 0 {
                xk_dfact *= ax / (2 * k + 1) as f64;
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            for m in 1..30 {
                term *= -0.5 * ax * ax / (m as f64 * (2 * (k + m) + 1) as f64);
                sum += term;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            *slot = xk_dfact * sum;
        }
    } else if (n as f64) <= ax {
        // forward recurrence is stable while k < x
        let (s, c) = ax.sin_cos();
        out[0] = s / ax;
        if n > 1 {
            out[1] = s / (ax * ax) - c / ax;
        }
        for k in 1..n.saturating_sub(1) {
            out[k + 1] = (2 * k + 1) as f64 / ax * out[k] - out[k - 1];
        }
    } else {
        // Miller's backward recurrence, normalised against the larger of j_0, j_1
        let start = n + 20 + ax as usize;
        let mut next = 0.0;
        let mut cur = 1e-30;
        let mut vals = vec![0.0; start + 1];
        vals[start] = cur;
        for k in (1..=start).rev() {
            let prev = (2 * k + 1) as f64 / ax * cur - next;
            next = cur;
            cur = prev;
            vals[k - 1] = cur;
            if cur.abs() > 1e250 {
                for v in vals[k - 1..].iter_mut() {
                    *v *= 1e-250;
                }
                next *= 1e-250;
                cur *= 1e-250;
            }
        }
        let (s, c) = ax.sin_cos();
        let j0 = s / ax;
        let j1 = s / (ax * ax) - c / ax;
        let scale = if j0.abs() >= j1.abs() { j0 / vals[0] } else { j1 / vals[1] };
        for k in 0..n {
            out[k] = vals[k] * scale;
        }
    }
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// Filon rule with `K` Gauss–Legendre sample points.
#[derive(Debug, Clone)]
pub struct FilonRule {
    nodes: Vec<f64>,
    /// `proj[j][q] = (2j+1)/2 W_q P_j(y_q)` maps samples to Legendre coefficients.
    proj: Vec<Vec<f64>>,
}

impl FilonRule {
    pub fn new(k: usize) -> Self {
        let gl = gauss_legendre(k);
        let proj = (0..k)
            .map(|j| {
                gl.nodes
                    .iter()
                    .zip(&gl.weights)
                    .map(|(&y, &w)| (2 * j + 1) as f64 / 2.0 * w * legendre_with_derivative(j, y).0)
                    .collect()
            })
            .collect();
        FilonRule { nodes: gl.nodes.clone(), proj }
    }

    /// Shared rule with `k` points (`k` ≤ 40).
    pub fn cached(k: usize) -> &'static FilonRule {
        static RULES: OnceLock<Vec<FilonRule>> = OnceLock::new();
        &RULES.get_or_init(|| (0..=40).map(|k| FilonRule::new(k.max(1))).collect())[k]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sample points on [-1, 1].
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights `ω_q(κ)` such that `∫_{-1}^{1} e^{iκy} g(y) dy ≈ Σ_q ω_q g(y_q)`.
    pub fn weights(&self, kappa: f64) -> Vec<Complex64> {
        let k = self.nodes.len();
        let jb = spherical_bessel_j(kappa, k);
        let mut moments = Vec::with_capacity(k);
        let mut ipow = Complex64::new(2.0, 0.0);
        for &b in &jb {
            moments.push(ipow * b);
            ipow *= Complex64::new(0.0, 1.0);
        }
        (0..k)
            .map(|q| moments.iter().enumerate().map(|(j, m)| m * self.proj[j][q]).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_low_orders_closed_form() {
        for &x in &[0.3, 2.5, 17.0, -4.0] {
            let j = spherical_bessel_j(x, 3);
            let (s, c) = x.sin_cos();
            let j0 = s / x;
            let j1 = s / (x * x) - c / x;
            let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
            assert!((j[0] - j0).abs() < 1e-15, "x={x}");
            assert!((j[1] - j1).abs() < 1e-15, "x={x}");
            assert!((j[2] - j2).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn filon_is_exact_for_polynomial_envelopes() {
        let rule = FilonRule::new(8);
        let kappa = 37.0;
        let w = rule.weights(kappa);
        let approx: Complex64 = rule.nodes().iter().zip(&w).map(|(&y, w)| w * (y * y)).sum();
        // ∫ y² e^{iκy} dy over [-1,1]
        let (s, c) = kappa.sin_cos();
        let exact = 2.0 * s / kappa + 4.0 * c / (kappa * kappa) - 4.0 * s / kappa.powi(3);
        assert!((approx - Complex64::new(exact, 0.0)).norm() < 1e-15);
    }
}
