#![allow(clippy::excessive_precision)]

use num_complex::Complex64;
use proptest::prelude::*;
use uaosc::kernels::{erfcx_real, faddeeva, field_integral, tail_e, tail_e_contour, FilonRule, QuadraticPhase};
use uaosc::problem::builtin_henon_heiles;
use uaosc::spectral::{Spectral, SpectralConfig};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn close(got: Complex64, want: Complex64, rel: f64) {
    let err = (got - want).norm() / want.norm();
    assert!(err <= rel, "got {got}, want {want}, rel err {err:e}");
}

// values from 25-digit oscillatory quadrature
#[test]
fn tail_kernel_matches_high_precision_values() {
    close(tail_e(1, -2, 5.0).unwrap(), c(0.1117284847306689541568951, 0.1921982649577439809462731), 1e-13);
    close(tail_e(2, 3, 0.7).unwrap(), c(-0.3663245469113947311493541, -0.1111042047574174981129133), 1e-12);
    close(tail_e(3, -1, 2.0).unwrap(), c(-0.5206410965049259530343003, 0.08380515044274521899566082), 1e-12);
    close(tail_e(2, 1, 0.0).unwrap(), c(2.320028826233969550588305, 1.339469267353873816827846), 1e-13);
    close(tail_e(2, 1, 10.0).unwrap(), c(0.104422020409575399889274933629, -0.186435422373905085823258928635), 1e-12);
}

#[test]
fn e1_at_origin_is_gaussian_constant() {
    let want = Complex64::from_polar(std::f64::consts::PI.sqrt(), std::f64::consts::FRAC_PI_4);
    close(tail_e(1, 1, 0.0).unwrap(), want, 1e-15);
    close(tail_e(1, -1, 0.0).unwrap(), want.conj(), 1e-15);
}

#[test]
fn faddeeva_matches_high_precision_values() {
    close(faddeeva(c(1.0, 1.0)), c(0.3047442052569125924571388, 0.2082189382028316272874373), 1e-14);
    close(faddeeva(c(-3.0, 0.5)), c(0.03712636605469234466712036, -0.1929837553003620883910076), 1e-14);
    close(faddeeva(c(0.1, -0.2)), c(1.256693873150385054903026, 0.1624429849963238702523923), 1e-14);
    close(faddeeva(c(20.0, 5.0)), c(0.006659221263207824714525651, 0.02657402237908979049597095), 1e-14);
}

#[test]
fn erfcx_is_monotone_and_asymptotic() {
    let mut prev = f64::INFINITY;
    for k in 0..400 {
        let y = -5.0 + 0.1 * k as f64;
        let v = erfcx_real(y);
        assert!(v < prev, "not decreasing at {y}");
        prev = v;
    }
    let y = 1e4;
    let asym = 1.0 / (y * std::f64::consts::PI.sqrt()) * (1.0 - 0.5 / (y * y));
    assert!((erfcx_real(y) / asym - 1.0).abs() < 1e-12);
}

#[test]
fn zero_mode_and_negative_argument_are_errors() {
    assert!(tail_e(1, 0, 1.0).is_err());
    assert!(tail_e(2, 1, -0.5).is_err());
    assert!(tail_e(0, 1, 1.0).is_err());
}

#[test]
fn filon_rule_integrates_polynomials_without_oscillation() {
    let rule = FilonRule::new(8);
    let w = rule.weights(0.0);
    let sum: Complex64 = w.iter().sum();
    // ∫_{-1}^{1} 1 = 2 when the oscillation is switched off
    assert!((sum - c(2.0, 0.0)).norm() < 1e-13);
}

#[test]
fn field_integral_of_constant_state_is_linear_in_the_interval() {
    let problem = builtin_henon_heiles(1.0).unwrap();
    let spectral = Spectral::new(&problem, SpectralConfig::default()).unwrap();
    let table = spectral.table(problem.u0()).unwrap();
    let phase = QuadraticPhase::new(1.0, problem.t0());
    let whole = field_integral(&phase, &table, 0.0, 1.0);
    let parts = field_integral(&phase, &table, 0.0, 0.3) + field_integral(&phase, &table, 0.3, 1.0);
    assert!((whole - parts).amax() < 1e-14);
}

proptest! {
    #[test]
    fn p0_is_additive(eps_exp in 0.0..14.0f64, a in 0.0..0.8f64, w1 in 1e-3..0.1f64, w2 in 1e-3..0.1f64, l in 1i64..8) {
        let phase = QuadraticPhase::new(2f64.powf(-eps_exp), 1.0 / 3.0);
        let (m, b) = (a + w1, a + w1 + w2);
        let lhs = phase.p0(l, a, b);
        let rhs = phase.p0(l, a, m) + phase.p0(l, m, b);
        prop_assert!((lhs - rhs).norm() <= 1e-13 * (b - a).max(1e-3));
    }

    #[test]
    fn p0_of_negative_mode_is_conjugate(eps_exp in 0.0..14.0f64, a in 0.0..0.9f64, w in 1e-3..0.1f64, l in 1i64..8) {
        let phase = QuadraticPhase::new(2f64.powf(-eps_exp), 0.4);
        let d = (phase.p0(-l, a, a + w) - phase.p0(l, a, a + w).conj()).norm();
        prop_assert!(d <= 1e-15);
    }

    #[test]
    fn p0_is_bounded_by_interval_length(eps_exp in 0.0..14.0f64, a in 0.0..0.9f64, w in 1e-4..0.1f64, l in -8i64..8) {
        let phase = QuadraticPhase::new(2f64.powf(-eps_exp), 0.4);
        prop_assert!(phase.p0(l, a, a + w).norm() <= w * (1.0 + 1e-12));
    }

    #[test]
    fn contour_and_closed_form_agree_for_p1(l in -6i64..6, s in 0.0..50.0f64) {
        prop_assume!(l != 0);
        let a = tail_e(1, l, s).unwrap();
        let b = tail_e_contour(1, l, s).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-3));
    }
}
