//! Command-line front end: `solve`, `sweep`, `verify-kernels`, `report`.
//!
//! Exit codes: 0 success, 1 numerical or runtime failure, 2 usage error.

use super::sweep::{run_method, run_sweep, ConvergenceReport, Method, SolveOptions, SweepSpec};
use super::verify::verify_kernels;
use crate::asymptotic::{time_grid, Tau0};
use crate::error::{Error, Result};
use crate::kernels::OmegaStrategy;
use crate::micromacro::{solve_micromacro, SchemeConfig};
use crate::problem::{ProblemParams, ProblemRegistry};
use crate::reference::{solve_reference, AdaptiveConfig};
use crate::spectral::SpectralConfig;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// Output spacing of `solve --method reference`, which takes no step.
const REFERENCE_OUTPUT_STEP: f64 = 1e-3;

/// Parses `0.25`, `1e-3` or `2^-4`.
pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('^') {
        Some((base, exp)) => {
            let b: f64 = base.trim().parse().map_err(|e| format!("bad base in '{s}': {e}"))?;
            let e: f64 = exp.trim().parse().map_err(|e| format!("bad exponent in '{s}': {e}"))?;
            b.powf(e)
        }
        None => s.parse().map_err(|e| format!("bad number '{s}': {e}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "uaosc", version, about = "Integrators for oscillatory ODEs whose frequency vanishes at t0")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem with one method and write the trajectory.
    Solve(SolveArgs),
    /// Error sweep over methods, epsilons and steps.
    Sweep(SweepArgs),
    /// Check the special-function kernels against independent oracles.
    VerifyKernels(VerifyArgs),
    /// Slopes and uniformity from a sweep CSV.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, default_value = "henon-heiles")]
    pub problem: String,
    /// Override of the vanishing instant.
    #[arg(long, value_parser = parse_number)]
    pub t0: Option<f64>,
    /// Override of the final time.
    #[arg(long = "T", value_parser = parse_number)]
    pub horizon: Option<f64>,
    #[arg(long, default_value = "mode-pair")]
    pub strategy: String,
    /// Use τ0 = t0/ε instead of t0^{p+1}/ε.
    #[arg(long)]
    pub tau0_literal: bool,
    /// θ samples of the Fourier tables (max mode is (N-2)/4).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Reference tolerance (rtol = atol).
    #[arg(long, value_parser = parse_number, default_value = "1e-12")]
    pub rtol: f64,
    /// Step limit of the reference solver.
    #[arg(long)]
    pub tmax_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub method: String,
    #[arg(long, value_parser = parse_number)]
    pub epsilon: f64,
    #[arg(long, value_parser = parse_number)]
    pub h: Option<f64>,
    /// Trajectory CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Micro-macro diagnostics CSV.
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', default_value = "micromacro")]
    pub method: Vec<String>,
    /// Comma-separated epsilons; defaults to 2^0..2^-11.
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    pub epsilon: Vec<f64>,
    /// Comma-separated steps; defaults to 0.1*2^0..0.1*2^-5.
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    pub h: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 20240229)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Sweep CSV to summarise.
    pub input: PathBuf,
}

/// Failure categories mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Unknown { .. } | Error::Unsupported(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.into())
    }
}

fn options(common: &CommonArgs) -> std::result::Result<SolveOptions, Failure> {
    let strategy: OmegaStrategy = common.strategy.parse()?;
    let mut opts = SolveOptions { strategy, ..Default::default() };
    if common.tau0_literal {
        opts.macro_opts.tau0 = Tau0::Literal;
    }
    if let Some(n) = common.samples {
        let spectral = SpectralConfig { samples: n, max_mode: n.saturating_sub(2) / 4, ..Default::default() };
        if n < 6 {
            return Err(Failure::Usage(format!("--samples must be at least 6, got {n}")));
        }
        opts.macro_opts.spectral = spectral;
    }
    if !(common.rtol > 0.0) {
        return Err(Failure::Usage(format!("--rtol must be positive, got {}", common.rtol)));
    }
    opts.reference = AdaptiveConfig::with_tol(common.rtol);
    if let Some(m) = common.tmax_steps {
        opts.reference.max_steps = m;
    }
    Ok(opts)
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn solve(args: &SolveArgs, registry: &ProblemRegistry) -> std::result::Result<(), Failure> {
    let method: Method = args.method.parse()?;
    let opts = options(&args.common)?;
    if !(args.epsilon > 0.0 && args.epsilon <= 1.0) {
        return Err(Failure::Usage(format!("--epsilon must lie in (0, 1], got {}", args.epsilon)));
    }
    let params = ProblemParams { eps: args.epsilon, t0: args.common.t0, horizon: args.common.horizon };
    let problem = registry.build(&args.common.problem, &params)?;
    if args.diagnostics.is_some() && method != Method::MicroMacro {
        return Err(Failure::Usage("--diagnostics only applies to --method micromacro".into()));
    }
    let traj = match (method, args.h) {
        (Method::Reference, Some(_)) => {
            return Err(Failure::Usage("the reference solver chooses its own steps; drop --h".into()))
        }
        (Method::Reference, None) => {
            let (times, _) = time_grid(problem.t0(), problem.horizon(), REFERENCE_OUTPUT_STEP)?;
            let (traj, stats) = solve_reference(&problem, &opts.reference, &times)?;
            eprintln!("reference: {} accepted, {} rejected steps", stats.accepted, stats.rejected);
            traj
        }
        (_, None) => return Err(Failure::Usage(format!("--method {method} needs --h"))),
        (_, Some(h)) if !(h > 0.0) => return Err(Failure::Usage(format!("--h must be positive, got {h}"))),
        (Method::MicroMacro, Some(h)) => {
            let cfg = SchemeConfig { h, strategy: opts.strategy, macro_opts: opts.macro_opts };
            let sol = solve_micromacro(&problem, &cfg)?;
            if let Some(p) = &args.diagnostics {
                let mut w = BufWriter::new(File::create(p)?);
                sol.write_diagnostics(&mut w)?;
                w.flush()?;
            }
            eprintln!("micromacro: max |Δ| = {:.3e}, max |Δ'| = {:.3e}", sol.max_delta(), sol.max_delta_rate());
            sol.trajectory()
        }
        (m, Some(h)) => run_method(&problem, m, h, &opts)?,
    };
    let mut w = output(args.out.as_deref())?;
    traj.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn sweep(args: &SweepArgs, registry: &ProblemRegistry) -> std::result::Result<(), Failure> {
    let methods = args.method.iter().map(|m| m.parse()).collect::<Result<Vec<Method>>>()?;
    let opts = options(&args.common)?;
    if !registry.contains(&args.common.problem) {
        return Err(Failure::Usage(format!("unknown problem '{}'", args.common.problem)));
    }
    let eps = if args.epsilon.is_empty() { SweepSpec::figure_eps() } else { args.epsilon.clone() };
    let h = if args.h.is_empty() { SweepSpec::figure_h(5) } else { args.h.clone() };
    let mut spec = SweepSpec::new(args.common.problem.clone(), methods, eps, h);
    spec.options = opts;
    spec.jobs = args.jobs;
    spec.cache_dir = args.cache_dir.clone();
    if args.common.t0.is_some() || args.common.horizon.is_some() {
        let base = registry.build(&spec.problem, &ProblemParams::new(1.0))?;
        spec.times = Some((args.common.t0.unwrap_or(base.t0()), args.common.horizon.unwrap_or(base.horizon())));
    }
    if let Err(e) = spec.validate() {
        return Err(Failure::Usage(e.to_string()));
    }
    let report = run_sweep(&spec, registry)?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut w = output(args.out.as_deref())?;
    report.write_csv(&mut w, Some(&format!("uaosc sweep, problem {}, unix time {stamp}", spec.problem)))?;
    w.flush()?;
    let failed = report.records.iter().filter(|r| r.reason.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} cells failed", report.records.len());
        return Err(Failure::Run(Error::Domain(format!("{failed} sweep cells failed"))));
    }
    Ok(())
}

fn verify(args: &VerifyArgs) -> std::result::Result<(), Failure> {
    let checks = verify_kernels(args.seed)?;
    let mut failed = 0;
    for c in &checks {
        println!("{c}");
        if !c.passed() {
            failed += 1;
        }
    }
    println!("{} checks, {failed} failed", checks.len());
    if failed > 0 {
        return Err(Failure::Run(Error::Domain(format!("{failed} kernel checks failed"))));
    }
    Ok(())
}

fn report(args: &ReportArgs) -> std::result::Result<(), Failure> {
    let report = ConvergenceReport::read_csv(File::open(&args.input)?)?;
    let mut out = io::stdout().lock();
    for m in report.methods() {
        writeln!(out, "{m}")?;
        for f in report.slopes_in_h(m) {
            writeln!(out, "  slope in h   at eps = {:.6e}: {:+.3} ({} points)", f.at, f.slope, f.points)?;
        }
        for f in report.slopes_in_eps(m) {
            writeln!(out, "  slope in eps at h   = {:.6e}: {:+.3} ({} points)", f.at, f.slope, f.points)?;
        }
        for (h, ratio) in report.uniformity(m) {
            writeln!(out, "  max/min error over eps at h = {h:.6e}: {ratio:.3}")?;
        }
    }
    Ok(())
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let registry = ProblemRegistry::with_builtins();
    let result = match &cli.command {
        Command::Solve(a) => solve(a, &registry),
        Command::Sweep(a) => sweep(a, &registry),
        Command::VerifyKernels(a) => verify(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_accept_powers() {
        assert_eq!(parse_number("2^-4").unwrap(), 0.0625);
        assert_eq!(parse_number("1e-3").unwrap(), 1e-3);
        assert!(parse_number("two").is_err());
    }
}
