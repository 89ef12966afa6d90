//! Step integrals of the p = 1 micro scheme.
//!
//! Pure-mode integrals go through [`QuadraticPhase::p0`]/[`QuadraticPhase::p1`]. The two
//! Ω-bearing integrals are reduced, mode pair by mode pair, to
//! `Q(m,ℓ) = ∫_a^b w(ξ) e^{i(m+ℓ)τ(ξ)} Ê_ℓ(τ(ξ)) dξ` with the smooth envelope
//! `Ê_ℓ(σ) = e^{-iℓσ} E_1(ℓ,σ)`, and `Q` is computed with one of two Filon-type
//! strategies.

use super::filon::FilonRule;
use super::fresnel::{e1_envelope, tail_e1, QuadraticPhase};
use super::tail::d2_omega;
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::spectral::FourierTable;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

/// How the Ω-bearing step integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub enum OmegaStrategy {
    /// Substitution `σ = τ(ξ)`, exact phase `e^{i(m+ℓ)σ}`, Legendre–Filon on panels
    /// graded geometrically towards `σ = 0`. Cost grows like `log(1/ε)`.
    #[default]
    ModePair,
    /// Panels in `ξ` short enough that the phase is linear up to 0.25 rad; the linear part
    /// is integrated exactly. Cost grows like `ε^{-1/2}`.
    Filon,
}

impl fmt::Display for OmegaStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OmegaStrategy::ModePair => "mode-pair",
            OmegaStrategy::Filon => "filon",
        })
    }
}

impl FromStr for OmegaStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mode-pair" => Ok(OmegaStrategy::ModePair),
            "filon" => Ok(OmegaStrategy::Filon),
            other => Err(Error::Unknown { kind: "strategy", name: other.to_string() }),
        }
    }
}

const MODE_PAIR_NODES: usize = 20;
const FILON_NODES: usize = 16;

/// `Re Σ_m c_m(u) P0(m; a, b)`, i.e. `∫_a^b F(τ(ξ), u) dξ`.
pub fn field_integral(phase: &QuadraticPhase, table: &FourierTable, a: f64, b: f64) -> DVector<f64> {
    let mut acc = table.coeff(0).map(|z| z * (b - a));
    for m in table.active_modes() {
        acc += table.coeff(m) * phase.p0(m, a, b);
    }
    acc.map(|z| z.re)
}

/// `Re Σ_m ∂_u c_m(u) P1(m; a, b, t_ref)`, i.e. `∫_a^b (ξ - t_ref) ∂₂F(τ(ξ), u) dξ`.
pub fn jacobian_moment(phase: &QuadraticPhase, table: &FourierTable, a: f64, b: f64, t_ref: f64) -> DMatrix<f64> {
    let mut acc = table.jac_coeff(0) * phase.p1(0, a, b, t_ref);
    for m in table.active_modes() {
        acc += table.jac_coeff(m) * phase.p1(m, a, b, t_ref);
    }
    acc.map(|z| z.re)
}

/// Inputs of [`step_omega_integrals`] for the step `[a, b]`.
#[derive(Debug, Clone, Copy)]
pub struct StepInput<'a> {
    pub a: f64,
    pub b: f64,
    /// Table at `ū^k`, with Jacobian coefficients.
    pub ubar: &'a FourierTable,
    /// Table at `b^k`, with Jacobian coefficients.
    pub bk: &'a FourierTable,
    /// `⟨F⟩(ū^k)`.
    pub favg: &'a DVector<f64>,
    /// Evaluate `∂₂Ω₁` at `τ(a)` instead of `τ(ξ)` in the derivative term.
    pub frozen_derivative: bool,
}

/// The two Ω-bearing step integrals (without the branch sign).
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaIntegrals {
    /// `∫ (√ε/2)(ξ-a) ∂₂F(τ(ξ),b^k) ∂₂Ω₁(τ(·),ū^k) ⟨F⟩(ū^k) dξ`.
    pub derivative_term: DVector<f64>,
    /// `∫ (√ε/2) ∂₂F(τ(ξ),b^k) (Ω₁(τ(ξ),ū^k) - Ω₁(τ(a),ū^k)) dξ`.
    pub difference_term: DVector<f64>,
}

/// Scalar integrals `Q(m,ℓ)` for weights 1 and `ξ - a`.
struct PairIntegrals {
    plain: Vec<Vec<Complex64>>,
    weighted: Option<Vec<Vec<Complex64>>>,
}

fn side_of(phase: &QuadraticPhase, a: f64, b: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::Domain(format!("step needs a < b, got [{a}, {b}]")));
    }
    if b <= phase.t0 {
        Ok(-1.0)
    } else if a >= phase.t0 {
        Ok(1.0)
    } else {
        Err(Error::Domain(format!("step [{a}, {b}] straddles t0 = {}", phase.t0)))
    }
}

/// Both Ω-bearing integrals of one micro step.
pub fn step_omega_integrals(phase: &QuadraticPhase, input: &StepInput, strategy: OmegaStrategy) -> Result<OmegaIntegrals> {
    let side = side_of(phase, input.a, input.b)?;
    let d = input.favg.len();
    let ls = input.ubar.active_modes();
    let mut ms = vec![0_i64];
    ms.extend(input.bk.active_modes());
    let half_sqrt_eps = 0.5 * phase.eps.sqrt();
    if ls.is_empty() {
        return Ok(OmegaIntegrals { derivative_term: DVector::zeros(d), difference_term: DVector::zeros(d) });
    }
    let need_weighted = !input.frozen_derivative;
    let q = match strategy {
        OmegaStrategy::ModePair => mode_pair(phase, side, input.a, input.b, &ms, &ls, need_weighted),
        OmegaStrategy::Filon => filon(phase, input.a, input.b, &ms, &ls, need_weighted),
    };

    let tau_a = phase.tau(input.a);
    let p0: Vec<Complex64> = ms.iter().map(|&m| phase.p0(m, input.a, input.b)).collect();
    let e_a: Vec<Complex64> = ls.iter().map(|&l| tail_e1(l, tau_a)).collect();

    let mut diff = DVector::<Complex64>::zeros(d);
    for (mi, &m) in ms.iter().enumerate() {
        let mut inner = DVector::<Complex64>::zeros(d);
        for (li, &l) in ls.iter().enumerate() {
            inner += input.ubar.coeff(l) * (q.plain[mi][li] - e_a[li] * p0[mi]);
        }
        diff += input.bk.jac_coeff(m) * inner;
    }
    let difference_term = diff.map(|z| z.re * half_sqrt_eps);

    let derivative_term = if input.frozen_derivative {
        let w = d2_omega(input.ubar, 1, 1, tau_a)? * input.favg;
        jacobian_moment(phase, input.bk, input.a, input.b, input.a) * w * half_sqrt_eps
    } else {
        let weighted = q.weighted.as_ref().expect("weighted integrals requested");
        let g = input.favg.map(|x| Complex64::new(x, 0.0));
        let dl: Vec<DVector<Complex64>> = ls.iter().map(|&l| input.ubar.jac_coeff(l) * &g).collect();
        let mut acc = DVector::<Complex64>::zeros(d);
        for (mi, &m) in ms.iter().enumerate() {
            let mut inner = DVector::<Complex64>::zeros(d);
            for (li, v) in dl.iter().enumerate() {
                inner += v * weighted[mi][li];
            }
            acc += input.bk.jac_coeff(m) * inner;
        }
        acc.map(|z| z.re * half_sqrt_eps)
    };

    Ok(OmegaIntegrals { derivative_term, difference_term })
}

fn zeros(nm: usize, nl: usize) -> Vec<Vec<Complex64>> {
    vec![vec![Complex64::new(0.0, 0.0); nl]; nm]
}

/// Lazily computed Filon weights per frequency `n = m + ℓ` on one panel.
struct WeightCache<'r> {
    rule: &'r FilonRule,
    offset: i64,
    slots: Vec<Option<Vec<Complex64>>>,
}

impl<'r> WeightCache<'r> {
    fn new(rule: &'r FilonRule, nmax: i64) -> Self {
        WeightCache { rule, offset: nmax, slots: vec![None; (2 * nmax + 1) as usize] }
    }

    fn get(&mut self, n: i64, kappa_per_n: f64) -> &[Complex64] {
        let i = (n + self.offset) as usize;
        let rule = self.rule;
        self.slots[i].get_or_insert_with(|| rule.weights(n as f64 * kappa_per_n))
    }
}

fn frequency_scale(ms: &[i64], ls: &[i64]) -> i64 {
    let mut nmax = 1;
    for &m in ms {
        for &l in ls {
            nmax = nmax.max((m + l).abs()).max(l.abs());
        }
    }
    nmax
}

fn mode_pair(
    phase: &QuadraticPhase,
    side: f64,
    a: f64,
    b: f64,
    ms: &[i64],
    ls: &[i64],
    need_weighted: bool,
) -> PairIntegrals {
    let (nm, nl) = (ms.len(), ls.len());
    let mut plain = zeros(nm, nl);
    let mut weighted = if need_weighted { Some(zeros(nm, nl)) } else { None };
    let nmax = frequency_scale(ms, ls);
    let (sa, sb) = (phase.tau(a), phase.tau(b));
    let (s_lo, s_hi) = if sa < sb { (sa, sb) } else { (sb, sa) };
    let s_cut = 1.0 / nmax as f64;
    let xi_of = |s: f64| phase.t0 + side * (phase.eps * s).sqrt();

    // panel touching σ = 0: plain Gauss–Legendre in ξ, the phase moves by at most 1 rad
    if s_lo < s_cut {
        let s_end = s_hi.min(s_cut);
        let (x1, x2) = (xi_of(s_lo), xi_of(s_end));
        let (lo, hi) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
        let gl = gauss_legendre(MODE_PAIR_NODES);
        let r = 0.5 * (hi - lo);
        for (y, w) in gl.nodes.iter().zip(&gl.weights) {
            let xi = 0.5 * (lo + hi) + r * y;
            let tau = phase.tau(xi);
            for (li, &l) in ls.iter().enumerate() {
                let env = e1_envelope(l, tau) * (w * r);
                for (mi, &m) in ms.iter().enumerate() {
                    let v = env * Complex64::from_polar(1.0, (m + l) as f64 * tau);
                    plain[mi][li] += v;
                    if let Some(wq) = weighted.as_mut() {
                        wq[mi][li] += v * (xi - a);
                    }
                }
            }
        }
    }

    // geometric panels [σ_i, 2σ_i]: the envelope's only singularity is at σ = 0
    let rule = FilonRule::cached(MODE_PAIR_NODES);
    let mut s1 = s_lo.max(s_cut);
    while s1 < s_hi {
        let s2 = (2.0 * s1).min(s_hi);
        let c = 0.5 * (s1 + s2);
        let r = 0.5 * (s2 - s1);
        let sig: Vec<f64> = rule.nodes().iter().map(|y| c + r * y).collect();
        let xi: Vec<f64> = sig.iter().map(|&s| xi_of(s)).collect();
        let jac: Vec<f64> = sig.iter().map(|&s| 0.5 * phase.eps.sqrt() / s.sqrt()).collect();
        let mut cache = WeightCache::new(rule, nmax + ms.iter().map(|m| m.abs()).max().unwrap_or(0));
        for (li, &l) in ls.iter().enumerate() {
            let env: Vec<Complex64> = sig.iter().zip(&jac).map(|(&s, &j)| e1_envelope(l, s) * j).collect();
            for (mi, &m) in ms.iter().enumerate() {
                let n = m + l;
                let wts = cache.get(n, r);
                let pre = Complex64::from_polar(r, n as f64 * c);
                let mut acc = Complex64::new(0.0, 0.0);
                let mut accw = Complex64::new(0.0, 0.0);
                for q in 0..wts.len() {
                    let t = wts[q] * env[q];
                    acc += t;
                    accw += t * (xi[q] - a);
                }
                plain[mi][li] += pre * acc;
                if let Some(wq) = weighted.as_mut() {
                    wq[mi][li] += pre * accw;
                }
            }
        }
        s1 = s2;
    }
    PairIntegrals { plain, weighted }
}

fn filon(phase: &QuadraticPhase, a: f64, b: f64, ms: &[i64], ls: &[i64], need_weighted: bool) -> PairIntegrals {
    let (nm, nl) = (ms.len(), ls.len());
    let mut plain = zeros(nm, nl);
    let mut weighted = if need_weighted { Some(zeros(nm, nl)) } else { None };
    let nmax = frequency_scale(ms, ls);
    // |n| r²/ε ≤ 1/4 keeps the residual quadratic phase below 0.25 rad
    let r_max = 0.5 * (phase.eps / nmax as f64).sqrt();
    let panels = ((b - a) / (2.0 * r_max)).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    let r = 0.5 * width;
    let rule = FilonRule::cached(FILON_NODES);
    let nodes = rule.nodes();
    for pi in 0..panels {
        let xc = a + (pi as f64 + 0.5) * width;
        let tau_c = phase.tau(xc);
        let slope = 2.0 * (xc - phase.t0) / phase.eps;
        let xi: Vec<f64> = nodes.iter().map(|y| xc + r * y).collect();
        let tau: Vec<f64> = xi.iter().map(|&x| phase.tau(x)).collect();
        let curv: Vec<f64> = nodes.iter().map(|y| r * r * y * y / phase.eps).collect();
        let mut cache = WeightCache::new(rule, nmax + ms.iter().map(|m| m.abs()).max().unwrap_or(0));
        for (li, &l) in ls.iter().enumerate() {
            let env: Vec<Complex64> = tau.iter().map(|&t| e1_envelope(l, t)).collect();
            for (mi, &m) in ms.iter().enumerate() {
                let n = m + l;
                let wts = cache.get(n, slope * r);
                let pre = Complex64::from_polar(r, n as f64 * tau_c);
                let mut acc = Complex64::new(0.0, 0.0);
                let mut accw = Complex64::new(0.0, 0.0);
                for q in 0..wts.len() {
                    let t = wts[q] * env[q] * Complex64::from_polar(1.0, n as f64 * curv[q]);
                    acc += t;
                    accw += t * (xi[q] - a);
                }
                plain[mi][li] += pre * acc;
                if let Some(wq) = weighted.as_mut() {
                    wq[mi][li] += pre * accw;
                }
            }
        }
    }
    PairIntegrals { plain, weighted }
}
