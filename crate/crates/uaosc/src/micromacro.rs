//! Uniformly accurate second-order micro-macro scheme for p = 1.
//!
//! The exact solution is written `u = ũ + Δ`: `ū` (hence `ũ`) is advanced by Heun on the
//! averaged field, and the defect `Δ`, whose time derivatives stay bounded uniformly in
//! ε, by a second-order step whose oscillatory integrals are taken mode by mode.

use crate::asymptotic::{
    corrected_initial, heun_step, jump_at_t0, time_grid, transport_step, Assembler, BracketMode, JumpData,
    MacroOptions, PostContext, Side, Trajectory,
};
use crate::error::{Error, Result};
use crate::kernels::{field_integral, jacobian_moment, step_omega_integrals, OmegaStrategy, QuadraticPhase, StepInput};
use crate::problem::ProblemSpec;
use crate::spectral::Spectral;
use nalgebra::DVector;
use std::io::{self, Write};

/// Parameters of one micro-macro solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    /// Largest step; `t0` is always a grid node.
    pub h: f64,
    pub strategy: OmegaStrategy,
    pub macro_opts: MacroOptions,
}

impl SchemeConfig {
    pub fn new(h: f64) -> Self {
        SchemeConfig { h, strategy: OmegaStrategy::default(), macro_opts: MacroOptions::default() }
    }

    pub fn with_strategy(mut self, strategy: OmegaStrategy) -> Self {
        self.strategy = strategy;
        self
    }
}

/// Per-node record of the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroMacroState {
    pub k: usize,
    pub t: f64,
    pub ubar: DVector<f64>,
    pub delta: DVector<f64>,
    pub tilde: DVector<f64>,
    pub side: Side,
}

impl MicroMacroState {
    /// `u^k = ũ^k + Δ^k`.
    pub fn u(&self) -> DVector<f64> {
        &self.tilde + &self.delta
    }
}

/// Result of [`solve_micromacro`].
#[derive(Debug, Clone)]
pub struct MicroMacroSolution {
    pub states: Vec<MicroMacroState>,
    /// Index of the node `t0`.
    pub k0: usize,
    pub jump: JumpData,
    pub eps: f64,
    pub h: f64,
}

impl MicroMacroSolution {
    pub fn trajectory(&self) -> Trajectory {
        Trajectory {
            times: self.states.iter().map(|s| s.t).collect(),
            states: self.states.iter().map(MicroMacroState::u).collect(),
            method: "micromacro".into(),
            eps: self.eps,
            h: Some(self.h),
        }
    }

    pub fn max_delta(&self) -> f64 {
        self.states.iter().map(|s| s.delta.norm()).fold(0.0, f64::max)
    }

    /// `max_k |Δ^{k+1} - Δ^k| / (t^{k+1} - t^k)`.
    pub fn max_delta_rate(&self) -> f64 {
        self.states
            .windows(2)
            .map(|w| (&w[1].delta - &w[0].delta).norm() / (w[1].t - w[0].t))
            .fold(0.0, f64::max)
    }

    /// Diagnostics CSV `k,t,norm_delta,norm_ubar,branch`.
    pub fn write_diagnostics<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "k,t,norm_delta,norm_ubar,branch")?;
        for s in &self.states {
            let branch = match s.side {
                Side::Pre => "pre",
                Side::Post => "post",
            };
            writeln!(w, "{},{:.16e},{:.16e},{:.16e},{}", s.k, s.t, s.delta.norm(), s.ubar.norm(), branch)?;
        }
        Ok(())
    }
}

/// Runs the scheme on `[0, T]`.
pub fn solve_micromacro(problem: &ProblemSpec, cfg: &SchemeConfig) -> Result<MicroMacroSolution> {
    if problem.p() != 1 {
        return Err(Error::Unsupported(format!("the micro-macro scheme needs p = 1, got p = {}", problem.p())));
    }
    let spectral = Spectral::new(problem, cfg.macro_opts.spectral)?;
    let tau0 = cfg.macro_opts.tau0.value(problem);
    let asm = Assembler { problem, spectral: &spectral, tau0 };
    let phase = QuadraticPhase::new(problem.eps(), problem.t0());
    let t0 = problem.t0();
    let (times, k0) = time_grid(t0, problem.horizon(), cfg.h)?;

    let transported = cfg.macro_opts.bracket == BracketMode::Transported;
    let post_ctx = |jump: &Option<JumpData>, w: &Option<DVector<f64>>| -> Option<(DVector<f64>, DVector<f64>)> {
        jump.as_ref().map(|j| (j.beta.clone(), w.clone().unwrap_or_else(|| j.bracket_t0.clone())))
    };
    let split = |t: f64, ubar: &DVector<f64>, side: Side, ctx: &Option<(DVector<f64>, DVector<f64>)>| {
        let post = ctx.as_ref().map(|(beta, bracket)| PostContext { beta, bracket });
        asm.split(t, ubar, side, post)
    };

    let u0 = problem.initial_filtered();
    let mut ubar = corrected_initial(problem, &spectral)?;
    let mut jump = None;
    // transported bracket after t0
    let mut w: Option<DVector<f64>> = None;
    if k0 == 0 {
        let j = jump_at_t0(problem, &spectral, &ubar, tau0)?;
        ubar = j.right.clone();
        if transported {
            w = Some(j.bracket_t0.clone());
        }
        jump = Some(j);
    }
    let side0 = if k0 == 0 { Side::Post } else { Side::Pre };
    let mut parts = split(0.0, &ubar, side0, &post_ctx(&jump, &w))?;
    let mut delta = &u0 - parts.total();

    let mut states = Vec::with_capacity(times.len());
    states.push(MicroMacroState { k: 0, t: 0.0, ubar: ubar.clone(), delta: delta.clone(), tilde: parts.total(), side: side0 });

    for k in 0..times.len() - 1 {
        let (a, b) = (times[k], times[k + 1]);
        let side = if k < k0 { Side::Pre } else { Side::Post };
        if k == k0 && k0 > 0 {
            // the averaged trajectory jumps, ũ and Δ are continuous
            let j = jump_at_t0(problem, &spectral, &ubar, tau0)?;
            problem.check_bound(t0, &j.right)?;
            ubar = j.right.clone();
            if transported {
                w = Some(j.bracket_t0.clone());
            }
            jump = Some(j);
            parts = split(a, &ubar, Side::Post, &post_ctx(&jump, &w))?;
        }
        let h = b - a;
        let mid = a + 0.5 * h;
        let tilde_k = parts.total();
        let u_k = &tilde_k + &delta;
        let a_k = &parts.smooth + &delta;

        let (ubar_half, ubar_next) = heun_step(&spectral, &ubar, h);
        let (w_half, w_next) = match &w {
            Some(w) => {
                let (x, y) = transport_step(&spectral, &ubar, &ubar_next, w, h);
                (Some(x), Some(y))
            }
            None => (None, None),
        };
        let half = split(mid, &ubar_half, side, &post_ctx(&jump, &w_half))?;
        let next = split(b, &ubar_next, side, &post_ctx(&jump, &w_next))?;

        let table_ubar = spectral.table_with_jacobian(&ubar)?;
        // b^k coincides with u^k
        let table_b = spectral.table_with_jacobian(&u_k)?;

        let delta_half = &delta + field_integral(&phase, &table_b, a, mid) - (half.total() - &tilde_k);
        let a_half = &half.smooth + &delta_half;
        let slope = (a_half - &a_k) / (0.5 * h);

        let favg = table_ubar.average();
        let input = StepInput {
            a,
            b,
            ubar: &table_ubar,
            bk: &table_b,
            favg: &favg,
            frozen_derivative: side == Side::Post,
        };
        let om = step_omega_integrals(&phase, &input, cfg.strategy)?;
        let sign = if side == Side::Pre { 1.0 } else { -1.0 };
        let increment = field_integral(&phase, &table_b, a, b)
            + jacobian_moment(&phase, &table_b, a, b, a) * slope
            + (om.derivative_term + om.difference_term) * sign;
        delta = &delta + increment - (next.total() - &tilde_k);

        ubar = ubar_next;
        w = w_next;
        parts = next;
        let state = MicroMacroState { k: k + 1, t: b, ubar: ubar.clone(), delta: delta.clone(), tilde: parts.total(), side };
        problem.check_bound(b, &state.u())?;
        states.push(state);
    }

    let jump = match jump {
        Some(j) => j,
        // t0 = T: the jump is never applied but is still reported
        None => jump_at_t0(problem, &spectral, &ubar, tau0)?,
    };
    Ok(MicroMacroSolution { states, k0, jump, eps: problem.eps(), h: cfg.h })
}
