//! Convergence sweeps over `(method, ε, h)` against the reference solver.

use super::slope::fit_slope;
use crate::asymptotic::{solve_first_order, solve_macro_second, time_grid, MacroOptions, Trajectory};
use crate::error::{Error, Result};
use crate::kernels::OmegaStrategy;
use crate::micromacro::{solve_micromacro, SchemeConfig};
use crate::problem::{ProblemParams, ProblemRegistry, ProblemSpec};
use crate::reference::{solve_reference, AdaptiveConfig};
use nalgebra::DVector;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

/// Solution methods a sweep can compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Averaged1,
    Averaged2,
    MicroMacro,
    Reference,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Averaged1, Method::Averaged2, Method::MicroMacro, Method::Reference];

    pub fn name(self) -> &'static str {
        match self {
            Method::Averaged1 => "averaged1",
            Method::Averaged2 => "averaged2",
            Method::MicroMacro => "micromacro",
            Method::Reference => "reference",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Unknown { kind: "method", name: s.to_string() })
    }
}

/// Numerical options shared by every cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveOptions {
    pub strategy: OmegaStrategy,
    pub macro_opts: MacroOptions,
    pub reference: AdaptiveConfig,
}

/// Trajectory of `method` on the grid of step `h` (the reference solver is sampled on the
/// same grid).
pub fn run_method(problem: &ProblemSpec, method: Method, h: f64, opts: &SolveOptions) -> Result<Trajectory> {
    match method {
        Method::Averaged1 => solve_first_order(problem, h, opts.macro_opts.spectral),
        Method::Averaged2 => solve_macro_second(problem, h, opts.macro_opts)?.tilde_trajectory(),
        Method::MicroMacro => {
            let cfg = SchemeConfig { h, strategy: opts.strategy, macro_opts: opts.macro_opts };
            Ok(solve_micromacro(problem, &cfg)?.trajectory())
        }
        Method::Reference => {
            let (times, _) = time_grid(problem.t0(), problem.horizon(), h)?;
            let (mut traj, _) = solve_reference(problem, &opts.reference, &times)?;
            traj.h = Some(h);
            Ok(traj)
        }
    }
}

/// What to run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub problem: String,
    pub methods: Vec<Method>,
    pub eps: Vec<f64>,
    pub h: Vec<f64>,
    /// Overrides of `(t0, T)`.
    pub times: Option<(f64, f64)>,
    pub options: SolveOptions,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    /// Directory for reference solutions reused across runs.
    pub cache_dir: Option<PathBuf>,
}

impl SweepSpec {
    pub fn new(problem: impl Into<String>, methods: Vec<Method>, eps: Vec<f64>, h: Vec<f64>) -> Self {
        SweepSpec {
            problem: problem.into(),
            methods,
            eps,
            h,
            times: None,
            options: SolveOptions::default(),
            jobs: 0,
            cache_dir: None,
        }
    }

    /// `ε = 2^{-k}`, `k = 0..=11`.
    pub fn figure_eps() -> Vec<f64> {
        (0..=11).map(|k| 2f64.powi(-k)).collect()
    }

    /// `h = 0.1·2^{-k}`, `k = 0..=kmax`.
    pub fn figure_h(kmax: i32) -> Vec<f64> {
        (0..=kmax).map(|k| 0.1 * 2f64.powi(-k)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() || self.eps.is_empty() || self.h.is_empty() {
            return Err(Error::Domain("sweep needs at least one method, epsilon and step".into()));
        }
        if let Some(e) = self.eps.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
            return Err(Error::Domain(format!("epsilon must lie in (0, 1], got {e}")));
        }
        if let Some(h) = self.h.iter().find(|&&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::Domain(format!("step must be positive, got {h}")));
        }
        Ok(())
    }

    fn build_problem(&self, registry: &ProblemRegistry, eps: f64) -> Result<ProblemSpec> {
        let mut params = ProblemParams::new(eps);
        if let Some((t0, horizon)) = self.times {
            params.t0 = Some(t0);
            params.horizon = Some(horizon);
        }
        registry.build(&self.problem, &params)
    }
}

/// One cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub method: Method,
    pub eps: f64,
    pub h: f64,
    /// `NaN` when the cell failed.
    pub max_error: f64,
    pub runtime_s: f64,
    pub reason: Option<String>,
}

/// Slope of error against `h` at fixed `(method, ε)`, or against `ε` at fixed `(method, h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub method: Method,
    /// The fixed parameter.
    pub at: f64,
    pub slope: f64,
    pub points: usize,
}

/// All records of a sweep with derived slope fits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceReport {
    pub records: Vec<Record>,
}

/// Column header of the sweep CSV.
pub const CSV_HEADER: [&str; 6] = ["method", "epsilon", "h", "max_error", "runtime_s", "reason"];

fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

impl ConvergenceReport {
    pub fn new(mut records: Vec<Record>) -> Self {
        records.sort_by(|a, b| {
            a.method.cmp(&b.method).then(a.eps.total_cmp(&b.eps)).then(a.h.total_cmp(&b.h))
        });
        ConvergenceReport { records }
    }

    fn ok(&self, method: Method) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(move |r| r.method == method && r.max_error.is_finite() && r.max_error > 0.0)
    }

    pub fn methods(&self) -> Vec<Method> {
        self.records.iter().map(|r| r.method).collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Error of one cell.
    pub fn error(&self, method: Method, eps: f64, h: f64) -> Option<f64> {
        self.records.iter().find(|r| r.method == method && r.eps == eps && r.h == h).map(|r| r.max_error)
    }

    /// Slope in `h` for each `ε` (fits need 3 or more points).
    pub fn slopes_in_h(&self, method: Method) -> Vec<SlopeFit> {
        self.slopes(method, |r| (r.eps, r.h))
    }

    /// Slope in `ε` for each `h`.
    pub fn slopes_in_eps(&self, method: Method) -> Vec<SlopeFit> {
        self.slopes(method, |r| (r.h, r.eps))
    }

    fn slopes(&self, method: Method, key: impl Fn(&Record) -> (f64, f64)) -> Vec<SlopeFit> {
        let mut groups: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
        for r in self.ok(method) {
            let (fixed, x) = key(r);
            groups.entry(fixed.to_bits()).or_default().push((x, r.max_error));
        }
        groups
            .into_iter()
            .filter(|(_, pts)| pts.len() >= 3)
            .filter_map(|(bits, pts)| {
                fit_slope(&pts).ok().map(|slope| SlopeFit { method, at: f64::from_bits(bits), slope, points: pts.len() })
            })
            .collect()
    }

    /// For each `h`: `max_ε error / min_ε error`, i.e. the spread of `error/h²` across ε.
    pub fn uniformity(&self, method: Method) -> Vec<(f64, f64)> {
        let mut groups: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
        for r in self.ok(method) {
            let e = groups.entry(r.h.to_bits()).or_insert((f64::INFINITY, 0.0));
            e.0 = e.0.min(r.max_error);
            e.1 = e.1.max(r.max_error);
        }
        groups.into_iter().map(|(bits, (lo, hi))| (f64::from_bits(bits), hi / lo)).collect()
    }

    /// Writes the CSV; `comment` becomes a leading `# ...` line.
    pub fn write_csv<W: Write>(&self, w: W, comment: Option<&str>) -> Result<()> {
        let mut w = w;
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.into());
        out.write_record(CSV_HEADER).map_err(io)?;
        for r in &self.records {
            out.write_record([
                r.method.name().to_string(),
                fmt_float(r.eps),
                fmt_float(r.h),
                fmt_float(r.max_error),
                fmt_float(r.runtime_s),
                r.reason.clone().unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self, comment: Option<&str>) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, comment)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parses a CSV written by [`ConvergenceReport::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).flexible(false).from_reader(r);
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        if headers.len() < 5 || headers.iter().take(5).ne(CSV_HEADER.iter().take(5).copied()) {
            return Err(Error::Parse(format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>())));
        }
        let mut records = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row.map_err(|e| Error::Parse(e.to_string()))?;
            let num = |j: usize| -> Result<f64> {
                row.get(j)
                    .unwrap_or("")
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: column {}: {e}", i + 1, CSV_HEADER[j])))
            };
            let reason = row.get(5).filter(|s| !s.is_empty()).map(str::to_string);
            records.push(Record {
                method: row.get(0).unwrap_or("").parse()?,
                eps: num(1)?,
                h: num(2)?,
                max_error: num(3)?,
                runtime_s: num(4)?,
                reason,
            });
        }
        Ok(ConvergenceReport::new(records))
    }
}

/// CSV text without comment lines and with the wall-clock column masked; two runs of the
/// same sweep must agree on this byte for byte.
pub fn deterministic_body(csv_text: &str) -> String {
    let mut out = String::new();
    for line in csv_text.lines().filter(|l| !l.starts_with('#')) {
        let mut fields: Vec<&str> = line.splitn(6, ',').collect();
        if fields.len() >= 5 && fields[4] != "runtime_s" {
            fields[4] = "*";
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Reference states on a set of times, exact lookup by time.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTable {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
}

impl ReferenceTable {
    pub fn at(&self, t: f64) -> Option<&DVector<f64>> {
        self.times.binary_search_by(|x| x.total_cmp(&t)).ok().map(|i| &self.states[i])
    }

    /// Max over the trajectory nodes of `‖u^k - u_ref(t^k)‖₂`.
    pub fn max_error(&self, traj: &Trajectory) -> Result<f64> {
        let mut err: f64 = 0.0;
        for (t, u) in traj.times.iter().zip(&traj.states) {
            let r = self.at(*t).ok_or_else(|| Error::Domain(format!("no reference value at t = {t}")))?;
            err = err.max((u - r).norm());
        }
        Ok(err)
    }

    fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (t, s) in self.times.iter().zip(&self.states) {
            write!(w, "{t:.16e}")?;
            for x in s.iter() {
                write!(w, ",{x:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    fn parse(text: &str) -> Result<Self> {
        let mut times = Vec::new();
        let mut states = Vec::new();
        for line in text.lines().filter(|l| !l.is_empty()) {
            let vals = line
                .split(',')
                .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            times.push(vals[0]);
            states.push(DVector::from_vec(vals[1..].to_vec()));
        }
        Ok(ReferenceTable { times, states })
    }
}

/// Cache key: SHA-256 over the problem data, the tolerances and the output times.
pub fn reference_key(problem: &ProblemSpec, cfg: &AdaptiveConfig, times: &[f64]) -> String {
    let mut h = Sha256::new();
    h.update(problem.name().as_bytes());
    h.update((problem.dim() as u64).to_le_bytes());
    for x in problem.a().iter().chain(problem.u0().iter()) {
        h.update(x.to_bits().to_le_bytes());
    }
    for x in [problem.t0(), problem.horizon(), problem.eps(), cfg.rtol, cfg.atol] {
        h.update(x.to_bits().to_le_bytes());
    }
    h.update(problem.p().to_le_bytes());
    for t in times {
        h.update(t.to_bits().to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Reference solution on `times`, read from or written to `cache_dir` when given.
pub fn reference_table(
    problem: &ProblemSpec,
    cfg: &AdaptiveConfig,
    times: &[f64],
    cache_dir: Option<&Path>,
) -> Result<ReferenceTable> {
    let path = cache_dir.map(|d| d.join(format!("ref-{}.csv", reference_key(problem, cfg, times))));
    if let Some(p) = &path {
        if let Ok(text) = fs::read_to_string(p) {
            let table = ReferenceTable::parse(&text)?;
            if table.times == times {
                return Ok(table);
            }
        }
    }
    let (traj, _) = solve_reference(problem, cfg, times)?;
    let table = ReferenceTable { times: traj.times, states: traj.states };
    if let (Some(p), Some(dir)) = (&path, cache_dir) {
        fs::create_dir_all(dir)?;
        let tmp = p.with_extension("tmp");
        table.write(fs::File::create(&tmp)?)?;
        fs::rename(&tmp, p)?;
    }
    Ok(table)
}

/// A problem instance with its reference, or why it could not be computed.
type PreparedReference = std::result::Result<(ProblemSpec, ReferenceTable), String>;

fn failed(method: Method, eps: f64, h: f64, reason: String) -> Record {
    Record { method, eps, h, max_error: f64::NAN, runtime_s: 0.0, reason: Some(reason.replace(['\n', '\r'], " ")) }
}

/// Runs every `(method, ε, h)` cell; failures become rows with a reason.
pub fn run_sweep(spec: &SweepSpec, registry: &ProblemRegistry) -> Result<ConvergenceReport> {
    spec.validate()?;
    if !registry.contains(&spec.problem) {
        return Err(Error::Unknown { kind: "problem", name: spec.problem.clone() });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    let records = pool.install(|| {
        // one reference per ε on the union of all grids
        let refs: Vec<(f64, PreparedReference)> = spec
            .eps
            .par_iter()
            .map(|&eps| {
                let run = || -> Result<(ProblemSpec, ReferenceTable)> {
                    let problem = spec.build_problem(registry, eps)?;
                    let mut all = BTreeSet::new();
                    for &h in &spec.h {
                        let (times, _) = time_grid(problem.t0(), problem.horizon(), h)?;
                        all.extend(times.into_iter().map(f64::to_bits));
                    }
                    let times: Vec<f64> = all.into_iter().map(f64::from_bits).collect();
                    let table = reference_table(&problem, &spec.options.reference, &times, spec.cache_dir.as_deref())?;
                    Ok((problem, table))
                };
                (eps, run().map_err(|e| format!("reference: {e}")))
            })
            .collect();

        let cells: Vec<(Method, usize, f64)> = spec
            .methods
            .iter()
            .flat_map(|&m| (0..refs.len()).flat_map(move |i| spec.h.iter().map(move |&h| (m, i, h))))
            .collect();
        cells
            .par_iter()
            .map(|&(method, i, h)| {
                let (eps, reference) = &refs[i];
                let (problem, table) = match reference {
                    Ok(x) => x,
                    Err(msg) => return failed(method, *eps, h, msg.clone()),
                };
                let start = Instant::now();
                let traj = run_method(problem, method, h, &spec.options);
                let runtime_s = start.elapsed().as_secs_f64();
                match traj.and_then(|t| table.max_error(&t)) {
                    Ok(max_error) => Record { method, eps: *eps, h, max_error, runtime_s, reason: None },
                    Err(e) => failed(method, *eps, h, e.to_string()),
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(ConvergenceReport::new(records))
}
