//! Special-function kernels and oscillatory quadrature.

pub mod faddeeva;
pub mod filon;
pub mod fresnel;
pub mod steps;
pub mod tail;

pub use faddeeva::{erf_complex, erfcx_real, faddeeva};
pub use filon::{spherical_bessel_j, FilonRule};
pub use fresnel::{e1_envelope, fresnel_envelope, fresnel_tail, tail_e1, QuadraticPhase};
pub use steps::{field_integral, jacobian_moment, step_omega_integrals, OmegaIntegrals, OmegaStrategy, StepInput};
pub use tail::{d2_omega, omega, tail_e, tail_e_contour};
