//! Registering a user-defined problem: a damped pendulum-like field under a rotation
//! in the (x1, x2) plane, solved by name through the registry. error/h² stays bounded
//! uniformly in ε.

use nalgebra::{DMatrix, DVector};
use std::sync::Arc;
use uaosc::harness::{run_sweep, Method, SweepSpec};
use uaosc::problem::{FnField, ProblemParams, ProblemRegistry, ProblemSpec};

fn build(eps: f64) -> uaosc::Result<ProblemSpec> {
    let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let field = FnField::new(3, |u| DVector::from_vec(vec![-0.2 * u[0], u[2].sin(), -u[0] * u[1]]));
    ProblemSpec::new("pendulum", a, Arc::new(field), 1, 0.4, 1.0, eps, DVector::from_vec(vec![1.0, 0.0, 0.5]))
}

fn main() -> uaosc::Result<()> {
    let mut registry = ProblemRegistry::with_builtins();
    registry.register("pendulum", build);
    println!("registered problems: {}", registry.names().collect::<Vec<_>>().join(", "));

    let problem = registry.build("pendulum", &ProblemParams::new(2f64.powi(-8)))?;
    println!("{} with eps = {}, t0 = {}, T = {}", problem.name(), problem.eps(), problem.t0(), problem.horizon());

    let eps = vec![1.0, 2f64.powi(-4), 2f64.powi(-8)];
    let spec = SweepSpec::new("pendulum", vec![Method::MicroMacro], eps, SweepSpec::figure_h(3));
    let report = run_sweep(&spec, &registry)?;
    for r in &report.records {
        println!("eps {:.4e} h {:.5}: error {:.3e}, error/h^2 {:.4}", r.eps, r.h, r.max_error, r.max_error / (r.h * r.h));
    }
    Ok(())
}
