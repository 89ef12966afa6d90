//! Micro-macro solve of the Hénon–Heiles benchmark across ε, compared with the
//! reference solver: the error stays near C·h² whatever ε is.

use uaosc::harness::reference_table;
use uaosc::micromacro::{solve_micromacro, SchemeConfig};
use uaosc::problem::builtin_henon_heiles;
use uaosc::reference::AdaptiveConfig;

fn main() -> uaosc::Result<()> {
    let h = 0.0125;
    println!("{:>10} {:>12} {:>10} {:>12}", "eps", "max error", "err/h^2", "sup |Delta|");
    for k in [0, 3, 6, 9, 12] {
        let eps = 2f64.powi(-k);
        let problem = builtin_henon_heiles(eps)?;
        let sol = solve_micromacro(&problem, &SchemeConfig::new(h))?;
        let traj = sol.trajectory();
        let reference = reference_table(&problem, &AdaptiveConfig::default(), &traj.times, None)?;
        let err = reference.max_error(&traj)?;
        println!("{:>10} {err:>12.3e} {:>10.3} {:>12.3e}", format!("2^-{k}"), err / (h * h), sol.max_delta());
    }

    let problem = builtin_henon_heiles(2f64.powi(-10))?;
    let sol = solve_micromacro(&problem, &SchemeConfig::new(h))?;
    let (t, u) = sol.trajectory().last().map(|(t, u)| (t, u.clone())).expect("nonempty");
    println!("u({t}) at eps = 2^-10: {:.6?}", u.as_slice());
    println!("jump of the averaged solution at t0: {:.3e}", (&sol.jump.right - &sol.jump.left).norm());
    Ok(())
}
