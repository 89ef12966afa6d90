use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use std::sync::Arc;
use uaosc::problem::{builtin_henon_heiles, builtin_rotor, FnField, ProblemParams, ProblemRegistry, ProblemSpec};
use uaosc::Error;

fn rotation() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

fn field2() -> Arc<FnField> {
    Arc::new(FnField::new(2, |u| DVector::from_vec(vec![u[1] * u[1], -u[0]])))
}

#[test]
fn invalid_inputs_are_rejected() {
    let u0 = DVector::from_vec(vec![1.0, 0.0]);
    let bad_eps = ProblemSpec::new("x", rotation(), field2(), 1, 0.5, 1.0, 0.0, u0.clone());
    assert!(matches!(bad_eps, Err(Error::InvalidProblem(_))));
    let bad_t0 = ProblemSpec::new("x", rotation(), field2(), 1, 1.5, 1.0, 0.5, u0.clone());
    assert!(bad_t0.is_err());
    let bad_dim = ProblemSpec::new("x", rotation(), field2(), 1, 0.5, 1.0, 0.5, DVector::zeros(3));
    assert!(bad_dim.is_err());
    let bad_p = ProblemSpec::new("x", rotation(), field2(), 0, 0.5, 1.0, 0.5, u0.clone());
    assert!(bad_p.is_err());
    // e^{θA} must be 2π-periodic
    let slow = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]);
    assert!(ProblemSpec::new("x", slow, field2(), 1, 0.5, 1.0, 0.5, u0).is_err());
}

#[test]
fn rotation_matrix_matches_matrix_exponential() {
    let problem = builtin_henon_heiles(0.1).unwrap();
    for theta in [0.0, 0.3, 2.0, -7.5] {
        let want = (problem.a() * theta).exp();
        let got = problem.rotation().matrix(theta);
        assert!((got - want).amax() < 1e-13, "theta = {theta}");
    }
}

#[test]
fn filtered_field_matches_the_raw_equation() {
    // d/dt (e^{-θA} U) = e^{-θA} f(U) when U solves the raw equation
    let problem = builtin_rotor(1, 0.2).unwrap();
    let big_u = DVector::from_vec(vec![0.4, -1.1]);
    let t = 0.8;
    let u = problem.filter(t, &big_u);
    let dt = 1e-6;
    let rhs = problem.raw_rhs(t, &big_u);
    let next = problem.filter(t + dt, &(&big_u + &rhs * dt));
    let prev = problem.filter(t - dt, &(&big_u - &rhs * dt));
    let fd = (next - prev) / (2.0 * dt);
    let want = problem.filtered_field(problem.theta(t), &u);
    assert!((fd - want).amax() < 1e-6);
}

#[test]
fn filtered_jacobian_matches_finite_differences() {
    let problem = builtin_henon_heiles(0.3).unwrap();
    let u = DVector::from_vec(vec![0.2, -0.4, 0.9, 0.1]);
    let theta = 1.7;
    let jac = problem.filtered_jacobian(theta, &u);
    for j in 0..4 {
        let mut e = DVector::zeros(4);
        e[j] = 1e-6;
        let col = (problem.filtered_field(theta, &(&u + &e)) - problem.filtered_field(theta, &(&u - &e))) / 2e-6;
        assert!((jac.column(j) - col).amax() < 1e-8);
    }
}

#[test]
fn phase_maps() {
    let p1 = builtin_rotor(1, 0.25).unwrap();
    assert_eq!(p1.mu(), -1);
    assert!((p1.theta(0.0) - (1.0 / 9.0) / 0.25).abs() < 1e-15);
    assert!((p1.gamma(1.0) - 2.0 * (2.0 / 3.0)).abs() < 1e-15);
    let p2 = builtin_rotor(2, 0.25).unwrap();
    assert_eq!(p2.mu(), 1);
    // θ keeps the sign of (t - t0)^{p+1}; τ is its absolute value
    assert!(p2.theta(0.0) < 0.0);
    assert!((p2.tau(0.0) + p2.theta(0.0)).abs() < 1e-15);
}

#[test]
fn registry_builds_and_overrides() {
    let reg = ProblemRegistry::with_builtins();
    assert!(reg.contains("henon-heiles") && reg.contains("rotor-p2"));
    let p = reg.build("henon-heiles", &ProblemParams { eps: 0.5, t0: Some(0.25), horizon: Some(2.0) }).unwrap();
    assert_eq!((p.eps(), p.t0(), p.horizon()), (0.5, 0.25, 2.0));
    assert!(matches!(reg.build("nope", &ProblemParams::new(0.5)), Err(Error::Unknown { .. })));
}

#[test]
fn bound_guard_trips() {
    let p = builtin_henon_heiles(0.5).unwrap();
    let big = DVector::from_element(4, 1e3);
    assert!(matches!(p.check_bound(0.5, &big), Err(Error::BoundExceeded { .. })));
    assert!(p.check_bound(0.5, p.u0()).is_ok());
}

proptest! {
    #[test]
    fn filter_round_trip(t in 0.0..1.0f64, eps_exp in 0.0..12.0f64, x in -3.0..3.0f64, y in -3.0..3.0f64, z in -3.0..3.0f64, w in -3.0..3.0f64) {
        let p = builtin_henon_heiles(2f64.powf(-eps_exp)).unwrap();
        let big = DVector::from_vec(vec![x, y, z, w]);
        let back = p.unfilter(t, &p.filter(t, &big));
        prop_assert!((back - &big).amax() <= 1e-12 * (1.0 + big.amax()));
    }

    #[test]
    fn filtered_field_is_2pi_periodic(theta in -20.0..20.0f64, x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let p = builtin_rotor(1, 0.5).unwrap();
        let u = DVector::from_vec(vec![x, y]);
        let a = p.filtered_field(theta, &u);
        let b = p.filtered_field(theta + 2.0 * std::f64::consts::PI, &u);
        prop_assert!((a - b).amax() <= 1e-12);
    }
}
