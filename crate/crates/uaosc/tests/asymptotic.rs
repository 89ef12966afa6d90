use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use std::sync::Arc;
use uaosc::asymptotic::{
    solve_first_order, solve_macro_second, time_grid, BracketMode, MacroOptions, Order, Side, Tau0,
};
use uaosc::problem::{builtin_henon_heiles, builtin_rotor, FnField, ProblemSpec};
use uaosc::spectral::SpectralConfig;

#[test]
fn tilde_u_is_continuous_across_t0() {
    for k in [2, 6, 10] {
        let problem = builtin_henon_heiles(2f64.powi(-k)).unwrap();
        let model = solve_macro_second(&problem, 0.01, MacroOptions::default()).unwrap();
        let t0 = problem.t0();
        let jump = model.jump();
        let left = model.tilde_from(t0, &jump.left, Side::Pre).unwrap();
        let right = model.tilde_from(t0, &jump.right, Side::Post).unwrap();
        assert!((left - right).amax() < 1e-13, "eps = 2^-{k}");
    }
}

#[test]
fn second_order_model_starts_close_to_the_data() {
    for k in [4, 8, 12] {
        let eps = 2f64.powi(-k);
        let problem = builtin_henon_heiles(eps).unwrap();
        let model = solve_macro_second(&problem, 0.01, MacroOptions::default()).unwrap();
        let e0 = (model.tilde_u(0.0).unwrap() - problem.initial_filtered()).norm();
        assert!(e0 <= eps, "eps = {eps}: {e0}");
    }
}

#[test]
fn frozen_and_transported_brackets_agree_at_t0() {
    let problem = builtin_henon_heiles(2f64.powi(-6)).unwrap();
    let opts = MacroOptions { bracket: BracketMode::Frozen, ..Default::default() };
    let frozen = solve_macro_second(&problem, 0.01, opts).unwrap();
    let moving = solve_macro_second(&problem, 0.01, MacroOptions::default()).unwrap();
    let t0 = problem.t0();
    assert!((frozen.bracket_at(t0) - moving.bracket_at(t0)).amax() < 1e-15);
    assert!((frozen.bracket_at(1.0) - moving.bracket_at(1.0)).amax() > 0.0);
}

#[test]
fn zero_field_leaves_every_model_at_rest() {
    let problem = ProblemSpec::new(
        "still",
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
        Arc::new(FnField::new(2, |_| DVector::zeros(2))),
        1,
        0.5,
        1.0,
        0.1,
        DVector::from_vec(vec![0.3, -0.7]),
    )
    .unwrap();
    let u0 = problem.initial_filtered();
    let first = solve_first_order(&problem, 0.1, SpectralConfig::default()).unwrap();
    let second = solve_macro_second(&problem, 0.1, MacroOptions::default()).unwrap().tilde_trajectory().unwrap();
    for s in first.states.iter().chain(&second.states) {
        assert!((s - &u0).amax() < 1e-15);
    }
}

#[test]
fn heun_is_second_order_on_the_averaged_field() {
    let problem = builtin_rotor(1, 0.1).unwrap();
    let fine = solve_first_order(&problem, 1e-4, SpectralConfig::default()).unwrap();
    let end = fine.last().unwrap().1.clone();
    let errs: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&h| (solve_first_order(&problem, h, SpectralConfig::default()).unwrap().last().unwrap().1 - &end).norm())
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn tau0_conventions() {
    let problem = builtin_henon_heiles(0.25).unwrap();
    assert!((Tau0::Scaled.value(&problem) - (1.0 / 9.0) / 0.25).abs() < 1e-15);
    assert!((Tau0::Literal.value(&problem) - (1.0 / 3.0) / 0.25).abs() < 1e-15);
}

#[test]
fn names_parse() {
    assert_eq!("first".parse::<Order>().unwrap(), Order::First);
    assert!("third".parse::<Order>().is_err());
}

#[test]
fn trajectory_csv_layout() {
    let problem = builtin_rotor(1, 0.5).unwrap();
    let traj = solve_first_order(&problem, 0.25, SpectralConfig::default()).unwrap();
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2"));
    let first = lines.next().unwrap();
    assert!(first.starts_with("0.0000000000000000e0,"));
    assert_eq!(text.lines().count(), traj.len() + 1);
}

proptest! {
    #[test]
    fn grid_hits_t0_with_short_steps(t0 in 0.0..1.0f64, extra in 0.0..2.0f64, h in 1e-3..0.5f64) {
        let horizon = t0 + extra;
        prop_assume!(horizon > 0.0);
        let (times, k0) = time_grid(t0, horizon, h).unwrap();
        prop_assert_eq!(times[k0], t0);
        prop_assert_eq!(*times.last().unwrap(), horizon);
        prop_assert_eq!(times[0], 0.0);
        for w in times.windows(2) {
            prop_assert!(w[1] > w[0] && w[1] - w[0] <= h * (1.0 + 1e-12));
        }
    }
}
