//! Experiment harness: convergence sweeps, slope fits, kernel verification and the CLI.

pub mod cli;
pub mod slope;
pub mod sweep;
pub mod verify;

pub use slope::fit_slope;
pub use sweep::{
    deterministic_body, reference_key, reference_table, run_method, run_sweep, ConvergenceReport, Method, Record,
    ReferenceTable, SlopeFit, SolveOptions, SweepSpec,
};
pub use verify::{verify_kernels, KernelCheck};
