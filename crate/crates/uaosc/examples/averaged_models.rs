//! First- and second-order averaged models against the reference: errors of order
//! ε^{1/2} and ε for p = 1, and ε^{1/3} for a p = 2 rotor.

use uaosc::asymptotic::{solve_first_order, solve_macro_second, MacroOptions};
use uaosc::harness::{fit_slope, reference_table};
use uaosc::problem::{builtin_henon_heiles, builtin_rotor, ProblemSpec};
use uaosc::reference::AdaptiveConfig;
use uaosc::spectral::SpectralConfig;

fn errors(problem: &ProblemSpec, h: f64) -> uaosc::Result<(f64, Option<f64>)> {
    let first = solve_first_order(problem, h, SpectralConfig::default())?;
    let reference = reference_table(problem, &AdaptiveConfig::default(), &first.times, None)?;
    let e1 = reference.max_error(&first)?;
    let e2 = if problem.p() == 1 {
        let second = solve_macro_second(problem, h, MacroOptions::default())?.tilde_trajectory()?;
        Some(reference.max_error(&second)?)
    } else {
        None
    };
    Ok((e1, e2))
}

fn main() -> uaosc::Result<()> {
    let h = 1e-3;
    let (mut first, mut second, mut rotor) = (vec![], vec![], vec![]);
    println!("{:>8} {:>14} {:>14} {:>14}", "eps", "averaged1", "averaged2", "rotor p=2");
    for k in (4..=12).step_by(2) {
        let eps = 2f64.powi(-k);
        let (e1, e2) = errors(&builtin_henon_heiles(eps)?, h)?;
        let (r1, _) = errors(&builtin_rotor(2, eps)?, h)?;
        let e2 = e2.expect("p = 1");
        println!("{:>8} {e1:>14.4e} {e2:>14.4e} {r1:>14.4e}", format!("2^-{k}"));
        first.push((eps, e1));
        second.push((eps, e2));
        rotor.push((eps, r1));
    }
    println!("fitted slopes in eps: averaged1 {:.3}, averaged2 {:.3}, rotor {:.3}",
        fit_slope(&first)?, fit_slope(&second)?, fit_slope(&rotor)?);
    Ok(())
}
