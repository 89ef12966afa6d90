use nalgebra::{DMatrix, DVector};
use std::sync::Arc;
use uaosc::harness::reference_table;
use uaosc::kernels::{step_omega_integrals, OmegaStrategy, QuadraticPhase, StepInput};
use uaosc::micromacro::{solve_micromacro, SchemeConfig};
use uaosc::problem::{builtin_henon_heiles, builtin_rotor, FnField, ProblemSpec};
use uaosc::reference::AdaptiveConfig;
use uaosc::spectral::{Spectral, SpectralConfig};
use uaosc::Error;

fn error_vs_reference(problem: &ProblemSpec, h: f64) -> f64 {
    let traj = solve_micromacro(problem, &SchemeConfig::new(h)).unwrap().trajectory();
    let reference = reference_table(problem, &AdaptiveConfig::default(), &traj.times, None).unwrap();
    reference.max_error(&traj).unwrap()
}

#[test]
fn requires_p_equal_one() {
    let problem = builtin_rotor(2, 0.1).unwrap();
    assert!(matches!(solve_micromacro(&problem, &SchemeConfig::new(0.1)), Err(Error::Unsupported(_))));
}

#[test]
fn zero_field_is_reproduced_exactly() {
    let problem = ProblemSpec::new(
        "still",
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
        Arc::new(FnField::new(2, |_| DVector::zeros(2))),
        1,
        0.5,
        1.0,
        2f64.powi(-10),
        DVector::from_vec(vec![0.3, -0.7]),
    )
    .unwrap();
    let sol = solve_micromacro(&problem, &SchemeConfig::new(0.05)).unwrap();
    let u0 = problem.initial_filtered();
    for s in &sol.states {
        assert!((s.u() - &u0).amax() < 1e-15);
        assert!(s.delta.amax() < 1e-15);
    }
}

#[test]
fn initial_value_is_exact() {
    let problem = builtin_henon_heiles(2f64.powi(-7)).unwrap();
    let sol = solve_micromacro(&problem, &SchemeConfig::new(0.05)).unwrap();
    assert!((sol.states[0].u() - problem.initial_filtered()).amax() < 1e-15);
    assert_eq!(sol.states[sol.k0].t, problem.t0());
}

#[test]
fn second_order_in_h_for_small_and_large_eps() {
    for eps in [1.0, 2f64.powi(-9)] {
        let problem = builtin_henon_heiles(eps).unwrap();
        let e1 = error_vs_reference(&problem, 0.02);
        let e2 = error_vs_reference(&problem, 0.01);
        let e3 = error_vs_reference(&problem, 0.005);
        assert!(e3 <= 0.3 * 0.005 * 0.005, "eps {eps}: {e3}");
        assert!(e1 / e3 > 10.0, "eps {eps}: {e1} {e2} {e3}");
    }
}

#[test]
fn vanishing_instant_at_either_end() {
    let eps = 2f64.powi(-6);
    for (t0, horizon) in [(0.0, 0.7), (0.7, 0.7)] {
        let problem = builtin_henon_heiles(eps).unwrap().with_times(t0, horizon).unwrap();
        let err = error_vs_reference(&problem, 0.01);
        assert!(err < 1e-4, "t0 = {t0}: {err}");
    }
}

#[test]
fn strategies_agree() {
    let problem = builtin_henon_heiles(2f64.powi(-5)).unwrap();
    let h = 0.02;
    let a = solve_micromacro(&problem, &SchemeConfig::new(h)).unwrap().trajectory();
    let b = solve_micromacro(&problem, &SchemeConfig::new(h).with_strategy(OmegaStrategy::Filon)).unwrap().trajectory();
    assert!(a.max_error(&b).unwrap() <= 1e-2 * h * h);
}

#[test]
fn defect_shrinks_with_eps() {
    let big = solve_micromacro(&builtin_henon_heiles(2f64.powi(-4)).unwrap(), &SchemeConfig::new(0.01)).unwrap();
    let small = solve_micromacro(&builtin_henon_heiles(2f64.powi(-10)).unwrap(), &SchemeConfig::new(0.01)).unwrap();
    assert!(small.max_delta() < big.max_delta() / 20.0);
}

#[test]
fn diagnostics_csv_has_one_row_per_node() {
    let problem = builtin_henon_heiles(0.5).unwrap();
    let sol = solve_micromacro(&problem, &SchemeConfig::new(0.1)).unwrap();
    let mut buf = Vec::new();
    sol.write_diagnostics(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("k,t,norm_delta,norm_ubar,branch"));
    assert_eq!(text.lines().count(), sol.states.len() + 1);
    assert!(text.lines().nth(1).unwrap().ends_with(",pre"));
    assert!(text.lines().last().unwrap().ends_with(",post"));
}

#[test]
fn steps_may_not_straddle_t0() {
    let problem = builtin_henon_heiles(0.25).unwrap();
    let spectral = Spectral::new(&problem, SpectralConfig::default()).unwrap();
    let t = spectral.table_with_jacobian(problem.u0()).unwrap();
    let favg = t.average();
    let input = StepInput { a: 0.3, b: 0.4, ubar: &t, bk: &t, favg: &favg, frozen_derivative: false };
    let phase = QuadraticPhase::new(0.25, problem.t0());
    assert!(matches!(step_omega_integrals(&phase, &input, OmegaStrategy::ModePair), Err(Error::Domain(_))));
}
