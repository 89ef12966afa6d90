//! Reference solver: Dormand–Prince 5(4) with PI step control on the filtered equation
//! `u' = F(θ(t), u)`.
//!
//! Deliberately structure-blind. Its cost grows like `1/ε` since it must resolve every
//! oscillation.

use crate::asymptotic::Trajectory;
use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use nalgebra::DVector;

/// Tolerances and limits of [`solve_reference`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen automatically when `None`.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig { rtol: 1e-12, atol: 1e-12, initial_step: None, max_steps: 50_000_000 }
    }
}

impl AdaptiveConfig {
    pub fn with_tol(tol: f64) -> Self {
        AdaptiveConfig { rtol: tol, atol: tol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::Domain(format!("tolerances must be positive, got rtol={} atol={}", self.rtol, self.atol)));
        }
        if self.max_steps == 0 {
            return Err(Error::Domain("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Counters of one reference solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights (equal to the last row of `A`, first-same-as-last).
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
/// Difference between fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Generic DOPRI5 integration of `u' = rhs(t, u)`, landing exactly on every output time.
///
/// `outputs` must be sorted, within `[t_start, ∞)`.
pub fn integrate<F>(
    rhs: F,
    t_start: f64,
    u_start: &DVector<f64>,
    outputs: &[f64],
    cfg: &AdaptiveConfig,
) -> Result<(Vec<DVector<f64>>, SolveStats)>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    cfg.validate()?;
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t_start) {
        return Err(Error::Domain("output times must be sorted and not before the start".into()));
    }
    let mut stats = SolveStats::default();
    let mut out = Vec::with_capacity(outputs.len());
    let mut t = t_start;
    let mut u = u_start.clone();
    let mut k1 = rhs(t, &u);
    stats.evaluations += 1;
    let t_end = outputs.last().copied().unwrap_or(t_start);
    let mut h = match cfg.initial_step {
        Some(h) => h,
        None => initial_step(&rhs, t, &u, &k1, cfg, &mut stats),
    }
    .min((t_end - t).max(f64::MIN_POSITIVE));
    let mut err_prev: f64 = 1e-4;
    let mut next_out = 0;
    let mut k = vec![DVector::<f64>::zeros(u.len()); 7];

    while next_out < outputs.len() && outputs[next_out] <= t {
        out.push(u.clone());
        next_out += 1;
    }
    while next_out < outputs.len() {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::MaxStepsExceeded { max_steps: cfg.max_steps, t_reached: t });
        }
        let target = outputs[next_out];
        let mut landing = false;
        if t + h >= target || t + 1.01 * h >= target {
            h = target - t;
            landing = true;
        }
        k[0] = k1.clone();
        for s in 1..7 {
            let mut y = u.clone();
            for (j, kj) in k.iter().enumerate().take(s) {
                if A[s][j] != 0.0 {
                    y.axpy(h * A[s][j], kj, 1.0);
                }
            }
            k[s] = rhs(t + C[s] * h, &y);
        }
        stats.evaluations += 6;
        let mut u_new = u.clone();
        for (s, ks) in k.iter().enumerate() {
            if B[s] != 0.0 {
                u_new.axpy(h * B[s], ks, 1.0);
            }
        }
        let mut err: f64 = 0.0;
        for i in 0..u.len() {
            let mut e = 0.0;
            for (s, ks) in k.iter().enumerate() {
                e += E[s] * ks[i];
            }
            let sc = cfg.atol + cfg.rtol * u[i].abs().max(u_new[i].abs());
            err = err.max((h * e).abs() / sc);
        }
        if !err.is_finite() {
            return Err(Error::BoundExceeded { t, norm: f64::INFINITY, bound: f64::INFINITY });
        }
        if err <= 1.0 {
            stats.accepted += 1;
            t = if landing { target } else { t + h };
            u = u_new;
            k1 = k[6].clone();
            let fac = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0) };
            err_prev = err.max(1e-4);
            let h_next = h * fac.clamp(0.2, 5.0);
            while next_out < outputs.len() && outputs[next_out] <= t {
                out.push(u.clone());
                next_out += 1;
            }
            // a truncated landing step says nothing about the natural step size
            h = if landing { h_next.max(h) } else { h_next };
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
        if !(h > 0.0) || t + h == t {
            return Err(Error::Domain(format!("step size underflow at t = {t}")));
        }
    }
    Ok((out, stats))
}

fn initial_step<F>(rhs: &F, t: f64, u: &DVector<f64>, f0: &DVector<f64>, cfg: &AdaptiveConfig, stats: &mut SolveStats) -> f64
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    let scale = |i: usize| cfg.atol + cfg.rtol * u[i].abs();
    let n = u.len().max(1) as f64;
    let d0 = ((0..u.len()).map(|i| (u[i] / scale(i)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = ((0..u.len()).map(|i| (f0[i] / scale(i)).powi(2)).sum::<f64>() / n).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let u1 = u + f0 * h0;
    let f1 = rhs(t + h0, &u1);
    stats.evaluations += 1;
    let d2 = ((0..u.len()).map(|i| ((f1[i] - f0[i]) / scale(i)).powi(2)).sum::<f64>() / n).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1)
}

/// Reference trajectory of the filtered equation at the requested times.
pub fn solve_reference(problem: &ProblemSpec, cfg: &AdaptiveConfig, output_times: &[f64]) -> Result<(Trajectory, SolveStats)> {
    if let Some(&t) = output_times.iter().find(|&&t| !(0.0..=problem.horizon()).contains(&t)) {
        return Err(Error::Domain(format!("output time {t} outside [0, {}]", problem.horizon())));
    }
    let rhs = |t: f64, u: &DVector<f64>| problem.filtered_field(problem.theta(t), u);
    let (states, stats) = integrate(rhs, 0.0, &problem.initial_filtered(), output_times, cfg)?;
    let traj = Trajectory {
        times: output_times.to_vec(),
        states,
        method: "reference".into(),
        eps: problem.eps(),
        h: None,
    };
    Ok((traj, stats))
}
