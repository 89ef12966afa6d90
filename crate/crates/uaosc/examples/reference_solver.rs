//! The Dormand–Prince reference solver: cost grows like 1/ε while the answer is
//! insensitive to the tolerance.

use uaosc::asymptotic::time_grid;
use uaosc::problem::builtin_henon_heiles;
use uaosc::reference::{solve_reference, AdaptiveConfig};

fn main() -> uaosc::Result<()> {
    println!("{:>8} {:>10} {:>10} {:>14}", "eps", "accepted", "rejected", "|u(T)|");
    for k in [0, 4, 8, 12] {
        let problem = builtin_henon_heiles(2f64.powi(-k))?;
        let (times, _) = time_grid(problem.t0(), problem.horizon(), 0.05)?;
        let (traj, stats) = solve_reference(&problem, &AdaptiveConfig::default(), &times)?;
        let (_, u) = traj.last().expect("nonempty");
        println!("{:>8} {:>10} {:>10} {:>14.10}", format!("2^-{k}"), stats.accepted, stats.rejected, u.norm());
    }

    let problem = builtin_henon_heiles(2f64.powi(-6))?;
    let times = [problem.t0(), problem.horizon()];
    let (a, _) = solve_reference(&problem, &AdaptiveConfig::with_tol(1e-10), &times)?;
    let (b, _) = solve_reference(&problem, &AdaptiveConfig::with_tol(1e-12), &times)?;
    println!("tolerance 1e-10 vs 1e-12 at T: {:.2e}", (&a.states[1] - &b.states[1]).norm());
    Ok(())
}
