//! A small (ε, h) sweep of all methods, written as CSV with slope fits.
//!
//! `cargo run --release --example convergence_sweep -- sweep.csv`

use uaosc::harness::{run_sweep, Method, SweepSpec};
use uaosc::problem::ProblemRegistry;

fn main() -> uaosc::Result<()> {
    let out = std::env::args().nth(1);
    let eps = (0..=10).step_by(2).map(|k| 2f64.powi(-k)).collect();
    let mut spec = SweepSpec::new("henon-heiles", Method::ALL.to_vec(), eps, SweepSpec::figure_h(4));
    spec.jobs = 4;
    let report = run_sweep(&spec, &ProblemRegistry::with_builtins())?;

    for m in [Method::MicroMacro, Method::Averaged1, Method::Averaged2] {
        let h_slopes: Vec<String> = report.slopes_in_h(m).iter().map(|f| format!("{:.2}", f.slope)).collect();
        let e_slopes: Vec<String> = report.slopes_in_eps(m).iter().map(|f| format!("{:.2}", f.slope)).collect();
        println!("{m:>10}: slopes in h per eps [{}]", h_slopes.join(" "));
        println!("{:>10}  slopes in eps per h [{}]", "", e_slopes.join(" "));
    }
    for (h, ratio) in report.uniformity(Method::MicroMacro) {
        println!("micromacro h = {h:.5}: max/min error over eps = {ratio:.2}");
    }
    match out {
        Some(path) => report.write_csv(std::fs::File::create(&path)?, Some("example sweep"))?,
        None => println!("(pass a path to write the CSV)"),
    }
    Ok(())
}
