use std::process::Command;
use uaosc::harness::{deterministic_body, fit_slope, run_sweep, ConvergenceReport, Method, Record, SweepSpec};
use uaosc::problem::ProblemRegistry;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uaosc"))
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("uaosc-harness-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn slope_examples() {
    assert!((fit_slope(&[(1.0, 1.0), (2.0, 4.0), (4.0, 16.0)]).unwrap() - 2.0).abs() < 1e-14);
    assert!(fit_slope(&[(1.0, 3.0), (2.0, 3.0)]).unwrap().abs() < 1e-14);
    let noisy: Vec<(f64, f64)> = (0..8)
        .map(|k| {
            let x = 2f64.powi(-k);
            (x, x * x * (1.0 + if k % 2 == 0 { 0.05 } else { -0.05 }))
        })
        .collect();
    let s = fit_slope(&noisy).unwrap();
    assert!((1.9..=2.1).contains(&s), "{s}");
    assert!(fit_slope(&[(1.0, 1.0), (1.0, 2.0)]).is_err());
}

#[test]
fn reference_against_itself() {
    let spec = SweepSpec::new("henon-heiles", vec![Method::Reference], vec![2f64.powi(-5)], vec![0.05]);
    let report = run_sweep(&spec, &ProblemRegistry::with_builtins()).unwrap();
    assert_eq!(report.records.len(), 1);
    assert!(report.records[0].max_error <= 1e-10);
}

#[test]
fn failing_cells_are_recorded_and_the_sweep_continues() {
    let spec = SweepSpec::new("rotor-p2", vec![Method::MicroMacro, Method::Averaged1], vec![0.5], vec![0.1, 0.05]);
    let report = run_sweep(&spec, &ProblemRegistry::with_builtins()).unwrap();
    assert_eq!(report.records.len(), 4);
    for r in &report.records {
        match r.method {
            Method::MicroMacro => assert!(r.max_error.is_nan() && r.reason.as_deref().unwrap().contains("p = 1")),
            _ => assert!(r.max_error.is_finite() && r.reason.is_none()),
        }
    }
    // NaN survives the CSV round trip
    let text = report.to_csv_string(None).unwrap();
    let back = ConvergenceReport::read_csv(text.as_bytes()).unwrap();
    assert!(back.records.iter().any(|r| r.max_error.is_nan()));
}

#[test]
fn csv_round_trip_and_sorting() {
    let rec = |method, eps, h, e| Record { method, eps, h, max_error: e, runtime_s: 0.25, reason: None };
    let report = ConvergenceReport::new(vec![
        rec(Method::MicroMacro, 0.5, 0.1, 1e-3),
        rec(Method::Averaged1, 0.5, 0.1, 0.1 + 1e-17),
        rec(Method::MicroMacro, 0.25, 0.1, 2e-3),
    ]);
    assert_eq!(report.records[0].method, Method::Averaged1);
    assert_eq!(report.records[1].eps, 0.25);
    let text = report.to_csv_string(Some("stamp")).unwrap();
    assert!(text.starts_with("# stamp\nmethod,epsilon,h,max_error,runtime_s,reason\n"));
    let back = ConvergenceReport::read_csv(text.as_bytes()).unwrap();
    assert_eq!(back, report);
}

#[test]
fn slopes_and_uniformity_from_records() {
    let mut records = vec![];
    for eps in [1.0, 0.5, 0.25] {
        for h in [0.1, 0.05, 0.025] {
            records.push(Record { method: Method::MicroMacro, eps, h, max_error: 3.0 * h * h * (1.0 + eps), runtime_s: 0.0, reason: None });
        }
    }
    let report = ConvergenceReport::new(records);
    for f in report.slopes_in_h(Method::MicroMacro) {
        assert!((f.slope - 2.0).abs() < 1e-12);
    }
    for (_, ratio) in report.uniformity(Method::MicroMacro) {
        assert!((ratio - 2.0 / 1.25).abs() < 1e-12);
    }
}

#[test]
fn disk_cache_is_reused() {
    let dir = scratch("cache");
    let mut spec = SweepSpec::new("henon-heiles", vec![Method::MicroMacro], vec![0.25], vec![0.1, 0.05]);
    spec.cache_dir = Some(dir.clone());
    let reg = ProblemRegistry::with_builtins();
    let a = run_sweep(&spec, &reg).unwrap();
    let files: Vec<_> = std::fs::read_dir(&dir).unwrap().collect();
    assert_eq!(files.len(), 1);
    let b = run_sweep(&spec, &reg).unwrap();
    let body = |r: &ConvergenceReport| deterministic_body(&r.to_csv_string(None).unwrap());
    assert_eq!(body(&a), body(&b));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn cli_exit_codes() {
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code().unwrap();
    assert_eq!(code(&["solve", "--method", "reference", "--epsilon", "1", "--h", "0"]), 2);
    assert_eq!(code(&["solve", "--method", "micromacro", "--epsilon", "1", "--h", "0.1", "--problem", "nope"]), 2);
    assert_eq!(code(&["solve", "--method", "euler", "--epsilon", "1", "--h", "0.1"]), 2);
    assert_eq!(code(&["solve", "--method", "micromacro", "--epsilon", "1"]), 2);
    assert_eq!(code(&["sweep", "--epsilon", "2"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    // numerical guard: step limit of the reference solver
    assert_eq!(code(&["solve", "--method", "reference", "--epsilon", "2^-8", "--tmax-steps", "10"]), 1);
}

#[test]
fn cli_solve_and_report() {
    let dir = scratch("cli");
    let traj = dir.join("traj.csv");
    let diag = dir.join("diag.csv");
    let status = bin()
        .args(["solve", "--method", "micromacro", "--epsilon", "2^-6", "--h", "0.05", "--strategy", "filon", "--out"])
        .arg(&traj)
        .arg("--diagnostics")
        .arg(&diag)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&traj).unwrap();
    assert!(text.starts_with("t,x1,x2,x3,x4\n"));
    assert!(std::fs::read_to_string(&diag).unwrap().starts_with("k,t,norm_delta"));

    let sweep = dir.join("sweep.csv");
    let status = bin()
        .args(["sweep", "--method", "averaged1,micromacro", "--epsilon", "1,2^-2,2^-4", "--h", "0.1,0.05,0.025", "--out"])
        .arg(&sweep)
        .status()
        .unwrap();
    assert!(status.success());
    let out = bin().arg("report").arg(&sweep).output().unwrap();
    assert!(out.status.success());
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("micromacro") && report.contains("slope in h"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn cli_verify_kernels_passes() {
    let out = bin().arg("verify-kernels").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("0 failed"));
}
