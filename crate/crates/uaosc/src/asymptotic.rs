//! Averaged models and the assembled asymptotic approximation.
//!
//! First order: `u̲' = ⟨F⟩(u̲)` from `u_0^ε`. Second order: the same ODE for `ū` with a
//! corrected initial value and a jump at `t0`, then `ũ` built from `ū`, `Ω` and, for
//! p = 1, the `ε log` correction carrying `⟨∂₂G F⟩`.

use crate::error::{Error, Result};
use crate::kernels::omega;
use crate::problem::ProblemSpec;
use crate::spectral::{Spectral, SpectralConfig};
use nalgebra::DVector;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

/// Which definition of `τ0` enters the logarithmic correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tau0 {
    /// `τ0 = t0^{p+1}/ε`, the same scaling as `τ`.
    #[default]
    Scaled,
    /// `τ0 = t0/ε`.
    Literal,
}

impl Tau0 {
    pub fn value(self, problem: &ProblemSpec) -> f64 {
        match self {
            Tau0::Scaled => problem.tau(0.0),
            Tau0::Literal => problem.t0() / problem.eps(),
        }
    }
}

/// Position relative to `t0`; decides which one-sided formula applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Pre,
    Post,
}

impl Side {
    pub fn of(t: f64, t0: f64) -> Side {
        if t < t0 {
            Side::Pre
        } else {
            Side::Post
        }
    }
}

/// Uniform grid on `[0, t0]` and on `[t0, T]`, each with steps no longer than `h`.
///
/// Returns the nodes and the index of `t0` (`k0`). `t0` is always a node.
pub fn time_grid(t0: f64, horizon: f64, h: f64) -> Result<(Vec<f64>, usize)> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("step size must be positive, got {h}")));
    }
    let mut times = vec![0.0];
    let pre = (t0 / h).ceil() as usize;
    for k in 1..=pre {
        times.push(if k == pre { t0 } else { t0 * k as f64 / pre as f64 });
    }
    let k0 = times.len() - 1;
    let len = horizon - t0;
    let post = (len / h).ceil() as usize;
    for k in 1..=post {
        times.push(if k == post { horizon } else { t0 + len * k as f64 / post as f64 });
    }
    Ok((times, k0))
}

/// State sequence on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub method: String,
    pub eps: f64,
    /// Largest step of the grid; `None` for adaptive solvers.
    pub h: Option<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &DVector<f64>)> {
        self.times.last().map(|&t| (t, self.states.last().expect("states match times")))
    }

    /// Max over nodes of `‖self - other‖₂`; grids must coincide.
    pub fn max_error(&self, other: &Trajectory) -> Result<f64> {
        if self.times.len() != other.times.len() {
            return Err(Error::Domain("trajectories live on different grids".into()));
        }
        let mut err: f64 = 0.0;
        for ((ta, a), (tb, b)) in self.times.iter().zip(&self.states).zip(other.times.iter().zip(&other.states)) {
            if (ta - tb).abs() > 1e-12 * (1.0 + ta.abs()) {
                return Err(Error::Domain(format!("grid mismatch at t = {ta} vs {tb}")));
            }
            err = err.max((a - b).norm());
        }
        Ok(err)
    }

    /// CSV `t,x1..xd`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.states.first().map_or(0, |s| s.len());
        write!(w, "t")?;
        for i in 1..=d {
            write!(w, ",x{i}")?;
        }
        writeln!(w)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            write!(w, "{t:.16e}")?;
            for x in s.iter() {
                write!(w, ",{x:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Order of the averaged model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Order::First => "first",
            Order::Second => "second",
        })
    }
}

impl FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" | "1" => Ok(Order::First),
            "second" | "2" => Ok(Order::Second),
            other => Err(Error::Unknown { kind: "order", name: other.to_string() }),
        }
    }
}

/// How the `ε log(1+τ)` correction after `t0` carries `⟨∂₂G F⟩(ū(t0))` forward in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BracketMode {
    /// Transported by the linearised averaged flow, `w' = ∂⟨F⟩(ū) w`, `w(t0) = ⟨∂₂G F⟩(ū(t0))`.
    /// The jump at `t0` moves `ū` by the same `ε log(1/ε)` vector, which the averaged flow
    /// then transports; freezing the correction leaves an `ε log(1/ε)` mismatch.
    #[default]
    Transported,
    /// Frozen at `t0`.
    Frozen,
}

/// Options shared by the averaged solvers and the micro-macro scheme.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MacroOptions {
    pub tau0: Tau0,
    pub spectral: SpectralConfig,
    pub bracket: BracketMode,
}

/// One Heun step of the variational equation `w' = ∂⟨F⟩(ū) w` along a Heun step of `ū`
/// from `ubar` to `ubar_next`; returns `(w_half, w_next)`.
pub fn transport_step(
    spectral: &Spectral,
    ubar: &DVector<f64>,
    ubar_next: &DVector<f64>,
    w: &DVector<f64>,
    h: f64,
) -> (DVector<f64>, DVector<f64>) {
    let k1 = spectral.average_jacobian(ubar) * w;
    let half = w + &k1 * (0.5 * h);
    let pred = w + &k1 * h;
    let k2 = spectral.average_jacobian(ubar_next) * pred;
    let next = w + (k1 + k2) * (0.5 * h);
    (half, next)
}

/// One Heun step of `u' = ⟨F⟩(u)`: returns `(u + (h/2)g, u + (h/2)(g + ⟨F⟩(u + hg)))`.
pub fn heun_step(spectral: &Spectral, u: &DVector<f64>, h: f64) -> (DVector<f64>, DVector<f64>) {
    let g = spectral.average(u);
    let half = u + &g * (0.5 * h);
    let pred = u + &g * h;
    let g2 = spectral.average(&pred);
    let full = u + (g + g2) * (0.5 * h);
    (half, full)
}

/// Heun trajectory of `u' = ⟨F⟩(u)` from `u0` along the given nodes.
fn heun_along(spectral: &Spectral, problem: &ProblemSpec, times: &[f64], u0: DVector<f64>) -> Result<Vec<DVector<f64>>> {
    let mut out = Vec::with_capacity(times.len());
    let mut u = u0;
    problem.check_bound(times[0], &u)?;
    out.push(u.clone());
    for w in times.windows(2) {
        u = heun_step(spectral, &u, w[1] - w[0]).1;
        problem.check_bound(w[1], &u)?;
        out.push(u.clone());
    }
    Ok(out)
}

/// First-order averaged model `u̲' = ⟨F⟩(u̲)`, `u̲(0) = u_0^ε`, by Heun.
pub fn solve_first_order(problem: &ProblemSpec, h: f64, cfg: SpectralConfig) -> Result<Trajectory> {
    let spectral = Spectral::new(problem, cfg)?;
    let (times, _) = time_grid(problem.t0(), problem.horizon(), h)?;
    let states = heun_along(&spectral, problem, &times, problem.initial_filtered())?;
    Ok(Trajectory { times, states, method: "averaged1".into(), eps: problem.eps(), h: Some(h) })
}

/// Data of the second-order model at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpData {
    /// `ū(t0⁻)`.
    pub left: DVector<f64>,
    /// `ū(t0)` after the jump.
    pub right: DVector<f64>,
    pub beta: DVector<f64>,
    /// `⟨∂₂G F⟩(ū(t0))`, zero when p ≠ 1.
    pub bracket_t0: DVector<f64>,
}

/// Nodes of one side of the `ū` trajectory with `⟨F⟩` slopes for dense output.
#[derive(Debug, Clone, PartialEq)]
struct Branch {
    times: Vec<f64>,
    values: Vec<DVector<f64>>,
    slopes: Vec<DVector<f64>>,
}

impl Branch {
    fn new(spectral: &Spectral, times: Vec<f64>, values: Vec<DVector<f64>>) -> Self {
        let slopes = values.iter().map(|u| spectral.average(u)).collect();
        Branch { times, values, slopes }
    }

    /// Transported bracket along the post-`t0` nodes of `ū`.
    fn transported(spectral: &Spectral, ubar: &Branch, w0: DVector<f64>) -> Self {
        let mut values = vec![w0];
        for (i, w) in ubar.times.windows(2).enumerate() {
            let next = transport_step(spectral, &ubar.values[i], &ubar.values[i + 1], &values[i], w[1] - w[0]).1;
            values.push(next);
        }
        let slopes = ubar.values.iter().zip(&values).map(|(u, w)| spectral.average_jacobian(u) * w).collect();
        Branch { times: ubar.times.clone(), values, slopes }
    }

    /// Cubic Hermite interpolation.
    fn eval(&self, t: f64) -> DVector<f64> {
        let n = self.times.len();
        if n == 1 {
            return self.values[0].clone();
        }
        let i = match self.times.binary_search_by(|x| x.partial_cmp(&t).expect("finite times")) {
            Ok(i) => return self.values[i].clone(),
            Err(i) => i.clamp(1, n - 1) - 1,
        };
        let (ta, tb) = (self.times[i], self.times[i + 1]);
        let h = tb - ta;
        let s = (t - ta) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        &self.values[i] * h00 + &self.slopes[i] * (h10 * h) + &self.values[i + 1] * h01 + &self.slopes[i + 1] * (h11 * h)
    }
}

/// Second-order averaged model: `ū` on both sides of `t0` plus the data needed to assemble
/// `ũ` anywhere in `[0, T]`.
#[derive(Clone)]
pub struct MacroModel {
    problem: ProblemSpec,
    spectral: Spectral,
    tau0: f64,
    ubar0: DVector<f64>,
    jump: JumpData,
    pre: Branch,
    post: Branch,
    bracket: Option<Branch>,
    h: f64,
}

impl fmt::Debug for MacroModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MacroModel")
            .field("problem", &self.problem.name())
            .field("eps", &self.problem.eps())
            .field("tau0", &self.tau0)
            .field("ubar0", &self.ubar0.as_slice())
            .field("jump", &self.jump)
            .finish()
    }
}

/// Coefficient `ε^{1/(p+1)}/(p+1)` of the first correction.
pub fn correction_scale(problem: &ProblemSpec) -> f64 {
    let q = (problem.p() + 1) as f64;
    problem.eps().powf(1.0 / q) / q
}

/// Corrected initial value `ū(0) = u_0^ε - ε^{1/(p+1)}/(p+1) Ω_{-μ}(τ0, u_0^ε)`.
///
/// `Ω` is evaluated at `t0^{p+1}/ε` regardless of the `τ0` convention: this term comes
/// from the layer variable `τ(0)`, not from the logarithmic correction.
pub fn corrected_initial(problem: &ProblemSpec, spectral: &Spectral) -> Result<DVector<f64>> {
    let u0 = problem.initial_filtered();
    let table = spectral.table(&u0)?;
    Ok(&u0 - omega(&table, problem.p(), -problem.mu(), problem.tau(0.0))? * correction_scale(problem))
}

/// `ū(t0)` from `ū(t0⁻)`:
/// `ū⁻ + ε^{1/(p+1)}/(p+1) (Ω₁ + Ω_{-μ})(0, ū⁻) + δ_p (ε/4) log(1+τ0) ⟨∂₂G F⟩(ū⁻)`.
pub fn jump_at_t0(problem: &ProblemSpec, spectral: &Spectral, left: &DVector<f64>, tau0: f64) -> Result<JumpData> {
    let p = problem.p();
    let kappa = correction_scale(problem);
    let table = if p == 1 { spectral.table_with_jacobian(left)? } else { spectral.table(left)? };
    let om1_left = omega(&table, p, 1, 0.0)?;
    let mut right = left + (&om1_left + omega(&table, p, -problem.mu(), 0.0)?) * kappa;
    if p == 1 {
        right += table.bracket_d2g_f() * (0.25 * problem.eps() * tau0.ln_1p());
    }
    let table_r = if p == 1 { spectral.table_with_jacobian(&right)? } else { spectral.table(&right)? };
    let beta = (omega(&table_r, p, 1, 0.0)? - om1_left) * kappa;
    let bracket_t0 = if p == 1 { table_r.bracket_d2g_f() } else { DVector::zeros(left.len()) };
    Ok(JumpData { left: left.clone(), right, beta, bracket_t0 })
}

/// `ũ` split into its smooth part and the layer term `±ε^{1/(p+1)}/(p+1) Ω(τ, ū)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeParts {
    pub smooth: DVector<f64>,
    pub layer: DVector<f64>,
}

impl TildeParts {
    pub fn total(&self) -> DVector<f64> {
        &self.smooth + &self.layer
    }
}

/// Data the post-`t0` formula needs besides `ū(t)`.
#[derive(Debug, Clone, Copy)]
pub struct PostContext<'a> {
    pub beta: &'a DVector<f64>,
    /// `⟨∂₂G F⟩(ū(t0))`, frozen or transported to the current time.
    pub bracket: &'a DVector<f64>,
}

/// Evaluates the one-sided formulas for `ũ` given `ū`.
#[derive(Clone, Copy)]
pub struct Assembler<'a> {
    pub problem: &'a ProblemSpec,
    pub spectral: &'a Spectral,
    pub tau0: f64,
}

impl Assembler<'_> {
    /// Before `t0`: `ū - δ_p (ε/4) log((1+τ)/(1+τ0)) ⟨∂₂G F⟩(ū)` and `+κ Ω_{-μ}(τ, ū)`.
    /// After `t0`: `ū - δ_p (ε/4) log(1+τ) ⟨∂₂G F⟩(ū(t0)) + β` and `-κ Ω₁(τ, ū)`.
    /// The context is needed only after `t0`.
    pub fn split(&self, t: f64, ubar: &DVector<f64>, side: Side, post: Option<PostContext>) -> Result<TildeParts> {
        let problem = self.problem;
        let p = problem.p();
        let kappa = correction_scale(problem);
        let tau = problem.tau(t);
        let eps = problem.eps();
        match side {
            Side::Pre => {
                let table =
                    if p == 1 { self.spectral.table_with_jacobian(ubar)? } else { self.spectral.table(ubar)? };
                let layer = omega(&table, p, -problem.mu(), tau)? * kappa;
                let mut smooth = ubar.clone();
                if p == 1 {
                    let lg = ((1.0 + tau) / (1.0 + self.tau0)).ln();
                    smooth -= table.bracket_d2g_f() * (0.25 * eps * lg);
                }
                Ok(TildeParts { smooth, layer })
            }
            Side::Post => {
                let post = post.ok_or_else(|| Error::Domain("jump data at t0 required after t0".into()))?;
                let table = self.spectral.table(ubar)?;
                let layer = omega(&table, p, 1, tau)? * (-kappa);
                let mut smooth = ubar + post.beta;
                if p == 1 {
                    smooth -= post.bracket * (0.25 * eps * tau.ln_1p());
                }
                Ok(TildeParts { smooth, layer })
            }
        }
    }
}

impl MacroModel {
    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn initial(&self) -> &DVector<f64> {
        &self.ubar0
    }

    pub fn jump(&self) -> &JumpData {
        &self.jump
    }

    /// `ū(t)` by Hermite dense output; at `t0` the side picks the one-sided limit.
    pub fn ubar(&self, t: f64, side: Side) -> DVector<f64> {
        match side {
            Side::Pre if self.pre.times.len() > 1 => self.pre.eval(t),
            Side::Pre => self.jump.left.clone(),
            Side::Post => self.post.eval(t),
        }
    }

    /// Grid nodes of the `ū` trajectory (the node `t0` appears once, post-jump value).
    pub fn ubar_trajectory(&self) -> Trajectory {
        let mut times = self.pre.times.clone();
        let mut states = self.pre.values.clone();
        times.pop();
        states.pop();
        times.extend(&self.post.times);
        states.extend(self.post.values.iter().cloned());
        Trajectory { times, states, method: "averaged2-ubar".into(), eps: self.problem.eps(), h: Some(self.h) }
    }

    /// `ũ(t)` assembled from a given value of `ū` at `t` on the given side of `t0`.
    pub fn tilde_from(&self, t: f64, ubar: &DVector<f64>, side: Side) -> Result<DVector<f64>> {
        let bracket = self.bracket_at(t);
        let post = PostContext { beta: &self.jump.beta, bracket: &bracket };
        let parts = self.assembler().split(t, ubar, side, Some(post))?;
        Ok(parts.total())
    }

    /// `⟨∂₂G F⟩(ū(t0))` as used at time `t ≥ t0`.
    pub fn bracket_at(&self, t: f64) -> DVector<f64> {
        match &self.bracket {
            Some(b) => b.eval(t),
            None => self.jump.bracket_t0.clone(),
        }
    }

    pub fn assembler(&self) -> Assembler<'_> {
        Assembler { problem: &self.problem, spectral: &self.spectral, tau0: self.tau0 }
    }

    /// `ũ(t)` for any `t ∈ [0, T]`.
    pub fn tilde_u(&self, t: f64) -> Result<DVector<f64>> {
        let side = Side::of(t, self.problem.t0());
        self.tilde_from(t, &self.ubar(t, side), side)
    }

    /// `ũ` at the grid nodes.
    pub fn tilde_trajectory(&self) -> Result<Trajectory> {
        let traj = self.ubar_trajectory();
        let states = traj.times.iter().map(|&t| self.tilde_u(t)).collect::<Result<Vec<_>>>()?;
        Ok(Trajectory { states, method: "averaged2".into(), ..traj })
    }
}

/// Second-order model on the grid of step `h`.
pub fn solve_macro_second(problem: &ProblemSpec, h: f64, opts: MacroOptions) -> Result<MacroModel> {
    let spectral = Spectral::new(problem, opts.spectral)?;
    let (times, k0) = time_grid(problem.t0(), problem.horizon(), h)?;
    let tau0 = opts.tau0.value(problem);
    let ubar0 = corrected_initial(problem, &spectral)?;
    let pre_times = times[..=k0].to_vec();
    let pre_vals = heun_along(&spectral, problem, &pre_times, ubar0.clone())?;
    let left = pre_vals.last().expect("grid has t0").clone();
    let jump = jump_at_t0(problem, &spectral, &left, tau0)?;
    problem.check_bound(problem.t0(), &jump.right)?;
    let post_times = times[k0..].to_vec();
    let post_vals = heun_along(&spectral, problem, &post_times, jump.right.clone())?;
    let pre = Branch::new(&spectral, pre_times, pre_vals);
    let post = Branch::new(&spectral, post_times, post_vals);
    let bracket = match opts.bracket {
        BracketMode::Transported if problem.p() == 1 => {
            Some(Branch::transported(&spectral, &post, jump.bracket_t0.clone()))
        }
        _ => None,
    };
    Ok(MacroModel { problem: problem.clone(), spectral, tau0, ubar0, jump, pre, post, bracket, h })
}
