use nalgebra::{DMatrix, DVector};
use std::sync::Arc;
use uaosc::problem::{builtin_henon_heiles, FnField, ProblemSpec};
use uaosc::reference::{integrate, solve_reference, AdaptiveConfig};
use uaosc::Error;

fn zero_field(eps: f64) -> ProblemSpec {
    ProblemSpec::new(
        "still",
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
        Arc::new(FnField::new(2, |_| DVector::zeros(2))),
        1,
        0.5,
        1.0,
        eps,
        DVector::from_vec(vec![0.3, -0.7]),
    )
    .unwrap()
}

#[test]
fn zero_field_keeps_the_initial_value() {
    let problem = zero_field(1e-3);
    let (traj, _) = solve_reference(&problem, &AdaptiveConfig::default(), &[0.0, 0.5, 1.0]).unwrap();
    let u0 = problem.initial_filtered();
    for s in &traj.states {
        assert!((s - &u0).amax() < 1e-15);
    }
}

#[test]
fn halving_the_tolerance_barely_moves_the_answer() {
    let problem = builtin_henon_heiles(2f64.powi(-6)).unwrap();
    let rtol = 1e-9;
    let (a, _) = solve_reference(&problem, &AdaptiveConfig::with_tol(rtol), &[1.0]).unwrap();
    let (b, _) = solve_reference(&problem, &AdaptiveConfig::with_tol(rtol / 2.0), &[1.0]).unwrap();
    let norm = b.states[0].norm();
    assert!((&a.states[0] - &b.states[0]).norm() <= 10.0 * rtol * norm);
}

/// Classical RK4 with a fixed step, the independent oracle.
fn rk4(problem: &ProblemSpec, h: f64, t_end: f64) -> DVector<f64> {
    let f = |t: f64, u: &DVector<f64>| problem.filtered_field(problem.theta(t), u);
    let n = (t_end / h).round() as usize;
    let mut u = problem.initial_filtered();
    for k in 0..n {
        let t = k as f64 * h;
        let k1 = f(t, &u);
        let k2 = f(t + 0.5 * h, &(&u + &k1 * (0.5 * h)));
        let k3 = f(t + 0.5 * h, &(&u + &k2 * (0.5 * h)));
        let k4 = f(t + h, &(&u + &k3 * h));
        u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    u
}

#[test]
fn agrees_with_fine_fixed_step_rk4() {
    let problem = builtin_henon_heiles(2f64.powi(-4)).unwrap();
    let (traj, stats) = solve_reference(&problem, &AdaptiveConfig::default(), &[1.0]).unwrap();
    let oracle = rk4(&problem, 1e-6, 1.0);
    assert!((&traj.states[0] - oracle).norm() <= 1e-9);
    assert!(stats.accepted > 0);
}

#[test]
fn step_limit_reports_progress() {
    let problem = builtin_henon_heiles(2f64.powi(-10)).unwrap();
    let cfg = AdaptiveConfig { max_steps: 50, ..Default::default() };
    match solve_reference(&problem, &cfg, &[1.0]) {
        Err(Error::MaxStepsExceeded { max_steps, t_reached }) => {
            assert_eq!(max_steps, 50);
            assert!(t_reached > 0.0 && t_reached < 1.0);
        }
        other => panic!("expected step limit, got {other:?}"),
    }
}

#[test]
fn rejects_outputs_outside_the_horizon() {
    let problem = builtin_henon_heiles(0.5).unwrap();
    assert!(solve_reference(&problem, &AdaptiveConfig::default(), &[0.5, 1.5]).is_err());
    assert!(AdaptiveConfig { rtol: 0.0, ..Default::default() }.validate().is_err());
}

#[test]
fn rotation_flow_is_exact_to_tolerance() {
    // u' = Ju has the flow e^{tJ}
    let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let u0 = DVector::from_vec(vec![1.0, 0.0]);
    let outs: Vec<f64> = (1..=10).map(|k| k as f64).collect();
    let (ys, _) = integrate(|_, u| &j * u, 0.0, &u0, &outs, &AdaptiveConfig::default()).unwrap();
    for (t, y) in outs.iter().zip(&ys) {
        let exact = DVector::from_vec(vec![t.cos(), -t.sin()]);
        assert!((y - exact).norm() < 1e-10, "t = {t}");
    }
}
