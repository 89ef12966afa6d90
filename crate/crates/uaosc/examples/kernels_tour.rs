//! Special functions behind the scheme: erf, the tail kernel E_p, Fresnel step
//! integrals and the Ω operator.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};
use uaosc::kernels::{erf_complex, omega, tail_e, QuadraticPhase};
use uaosc::problem::builtin_henon_heiles;
use uaosc::spectral::{Spectral, SpectralConfig};

fn main() -> uaosc::Result<()> {
    for z in [Complex64::new(1.0, 0.0), Complex64::new(1.0, 1.0), Complex64::new(0.3, -4.0)] {
        println!("erf({z}) = {}", erf_complex(z));
    }

    let exact = Complex64::from_polar(PI.sqrt(), FRAC_PI_4);
    println!("E_1(1,0) = {}   (sqrt(pi) e^(i pi/4) = {exact})", tail_e(1, 1, 0.0)?);
    for p in 1..=3 {
        let vals: Vec<String> = [0.0, 1.0, 10.0, 100.0]
            .iter()
            .map(|&s| tail_e(p, 1, s).map(|e| format!("{:.3e}", e.norm())))
            .collect::<uaosc::Result<_>>()?;
        println!("|E_{p}(1,s)| at s = 0, 1, 10, 100: {}", vals.join(", "));
    }

    // exact integrals of e^{iℓ(ξ-t0)²/ε} over one step, across t0
    let phase = QuadraticPhase::new(2f64.powi(-8), 1.0 / 3.0);
    let (a, b) = (0.3, 0.4);
    println!("P0(2; {a}, {b}) = {}", phase.p0(2, a, b));
    println!("P1(2; {a}, {b}, {a}) = {}", phase.p1(2, a, b, a));

    // Ω₁ decays like s^{-1/2}
    let problem = builtin_henon_heiles(1.0)?;
    let spectral = Spectral::new(&problem, SpectralConfig::default())?;
    let table = spectral.table(problem.u0())?;
    for s in [0.0, 10.0, 100.0, 1000.0] {
        let om = omega(&table, 1, 1, s)?;
        println!("s = {s:>6}: |Omega_1| = {:.4e}, sqrt(s)|Omega_1| = {:.4}", om.norm(), s.sqrt() * om.norm());
    }
    Ok(())
}
