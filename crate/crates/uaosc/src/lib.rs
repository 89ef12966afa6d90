//! Uniformly accurate integrators for highly oscillatory ODEs with a degenerate
//! stiff rotation `U' = (γ(t)/ε) A U + f(U)`, `γ(t) = (p+1)(t-t0)^p`.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotic;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod micromacro;
pub mod problem;
pub mod quad;
pub mod reference;
pub mod spectral;

pub use error::{Error, Result};
