//! `ndeig`: batch front end for nonlinear eigenfunctions, limit profiles,
//! very singular solutions and their diagnostics.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use ndeig_core::diagnostics::{check_profile, DiagnosticsReport, ENVELOPE_WINDOW};
use ndeig_core::error::Error;
use ndeig_core::io::{read_profile, write_json, write_profile, OutputPaths};
use ndeig_core::limit::{build_piecewise, limit_zeros};
use ndeig_core::linear::homotopy_compare;
use ndeig_core::profile::Profile;
use ndeig_core::shooting::{shoot, DEFAULT_Y_MAX};
use ndeig_core::similarity::{p_crit, SimilarityParams};
use ndeig_core::vss::{solve_vss, Closure, VssProblem, VssSolution, DEFAULT_STEP, DEFAULT_Y0};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NO_CONVERGENCE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "ndeig", version, about = "Similarity profiles of odd-order nonlinear dispersion equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the similarity exponents and critical absorption exponent.
    Eigen(EigenArgs),
    /// Shoot the eigenfunction of index l from its interface.
    Shoot(ShootArgs),
    /// Zeros and piecewise-cubic profile of the n = inf limit.
    Limit(LimitArgs),
    /// Very singular solution of the equation with absorption.
    Vss(VssArgs),
    /// Diagnostics for a stored profile.
    Check(CheckArgs),
    /// Distance between nonlinear profiles and the linear eigenfunction.
    CompareLinear(CompareArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ClosureArg {
    Antisymmetric,
    Zero,
    TailMean,
}

impl From<ClosureArg> for Closure {
    fn from(c: ClosureArg) -> Self {
        match c {
            ClosureArg::Antisymmetric => Closure::Antisymmetric,
            ClosureArg::Zero => Closure::Zero,
            ClosureArg::TailMean => Closure::TailMean,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Output CSV path; the JSON files are placed next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for outputs when --out is not given.
    #[arg(long, env = "NDEIG_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Base name for outputs when --out is not given.
    #[arg(long)]
    name: Option<String>,
}

impl Output {
    fn paths(&self, default_name: &str) -> OutputPaths {
        match &self.out {
            Some(p) => OutputPaths::from_csv_path(p),
            None => OutputPaths::new(&self.out_dir, self.name.as_deref().unwrap_or(default_name)),
        }
    }

    /// Paths for one member of a sweep.
    fn sweep_paths(&self, default_name: &str, tag: &str) -> OutputPaths {
        let base = self.paths(default_name);
        let dir = base.csv.parent().map(Path::to_path_buf).unwrap_or_default();
        let stem = base
            .csv
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        OutputPaths::new(&dir, &format!("{stem}_{tag}"))
    }
}

#[derive(Args, Debug)]
struct EigenArgs {
    #[arg(long)]
    n: f64,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long)]
    l: u32,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug)]
struct ShootArgs {
    #[arg(long, required_unless_present = "sweep")]
    n: Option<f64>,
    #[arg(long, default_value_t = 0)]
    l: u32,
    #[arg(long, allow_hyphen_values = true, default_value_t = -10.0)]
    y0: f64,
    /// Launch offset from the interface; defaults to 1e-3 |y0|.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_Y_MAX)]
    ymax: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Comma-separated values of n solved in parallel.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<f64>>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct LimitArgs {
    #[arg(long)]
    l: u32,
    #[arg(long, default_value_t = 10)]
    zeros: usize,
    /// Nodes per cubic piece in the written profile.
    #[arg(long, default_value_t = 64)]
    per_piece: usize,
    /// Also write the piecewise-cubic profile as CSV.
    #[arg(long)]
    write_profile: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct VssArgs {
    #[arg(long, required_unless_present = "sweep")]
    n: Option<f64>,
    #[arg(long)]
    p: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_Y0)]
    y0: f64,
    /// Right end of the computational domain.
    #[arg(long, default_value_t = 30.0)]
    length: f64,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: f64,
    #[arg(long, value_enum, default_value = "antisymmetric")]
    closure: ClosureArg,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Comma-separated values of n solved in parallel.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<f64>>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Profile CSV written by shoot, limit or vss.
    #[arg(long)]
    profile: PathBuf,
    /// Eigenvalue index for the oscillation bound; defaults to the stored one.
    #[arg(long)]
    l: Option<u32>,
    #[arg(long, default_value_t = ENVELOPE_WINDOW.0)]
    window_lo: f64,
    #[arg(long, default_value_t = ENVELOPE_WINDOW.1)]
    window_hi: f64,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long, default_value_t = 0)]
    l: u32,
    #[arg(long, value_delimiter = ',', default_value = "0.7,0.5,0.3,0.2")]
    n_list: Vec<f64>,
}

/// Failure of a command with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoConvergence { .. } | Error::StepUnderflow(_) | Error::StateOverflow(_) => EXIT_NO_CONVERGENCE,
            Error::IndexOutOfRange { .. }
            | Error::InvalidScaling(_)
            | Error::InvalidExponents(_)
            | Error::InvalidArgument(_)
            | Error::BadDelta { .. } => EXIT_VALIDATION,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_VALIDATION,
        message: message.into(),
    }
}

fn print_json(value: &Value) {
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    // A closed pipe on stdout is not an error of the computation.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn tag(prefix: &str, v: f64) -> String {
    format!("{prefix}{v}").replace('-', "m")
}

fn eigen(args: &EigenArgs) -> CmdResult {
    let params = SimilarityParams::eigen(args.n, args.k, args.l)?;
    let pc = p_crit(args.n, args.k, args.l)?;
    match args.format {
        Format::Csv => {
            println!("alpha={}", params.alpha);
            println!("beta={}", params.beta);
            println!("p_crit={pc}");
        }
        Format::Json => print_json(&json!({
            "config": { "command": "eigen", "n": args.n, "k": args.k, "l": args.l },
            "alpha": params.alpha,
            "beta": params.beta,
            "p_crit": pc,
        })),
    }
    Ok(())
}

fn profile_summary(profile: &Profile) -> Value {
    let extrema: Vec<Value> = profile
        .extrema()
        .iter()
        .map(|e| json!({ "y": e.y, "value": e.value }))
        .collect();
    json!({ "zeros": profile.zeros(), "extrema": extrema })
}

fn write_bundle(paths: &OutputPaths, profile: &Profile, meta: Value, report: &DiagnosticsReport) -> CmdResult {
    write_profile(paths, profile, &meta)?;
    write_json(&paths.diag, report)?;
    Ok(())
}

fn shoot_one(args: &ShootArgs, n: f64, paths: &OutputPaths) -> Result<Value, Failure> {
    let profile = shoot(n, args.l, args.y0, args.delta, args.ymax, args.tol)?;
    let report = check_profile(&profile, args.l, ENVELOPE_WINDOW);
    let mut meta = json!({
        "config": {
            "command": "shoot", "n": n, "k": 1, "l": args.l, "y0": args.y0,
            "delta": profile.meta.delta, "ymax": args.ymax, "tol": args.tol,
        },
    });
    meta.as_object_mut()
        .expect("object literal")
        .extend(profile_summary(&profile).as_object().expect("object literal").clone());
    write_bundle(paths, &profile, meta, &report)?;
    Ok(json!({
        "n": n,
        "csv": paths.csv,
        "termination": profile.meta.termination,
        "zeros": profile.zeros().len(),
        "diagnostics_passed": report.passed(),
    }))
}

fn run_sweep<F>(values: &[f64], f: F) -> CmdResult
where
    F: Fn(f64) -> Result<Value, Failure> + Sync,
{
    let results: Vec<Result<Value, Failure>> = values.par_iter().map(|&v| f(v)).collect();
    let mut worst = 0u8;
    let mut rows = Vec::new();
    for r in results {
        match r {
            Ok(v) => rows.push(v),
            Err(e) => {
                eprintln!("error: {}", e.message);
                worst = worst.max(e.code);
                rows.push(json!({ "error": e.message }));
            }
        }
    }
    print_json(&Value::Array(rows));
    if worst == 0 {
        Ok(())
    } else {
        Err(Failure {
            code: worst,
            message: "sweep had failures".into(),
        })
    }
}

fn shoot_cmd(args: &ShootArgs) -> CmdResult {
    let default_name = format!("shoot_l{}", args.l);
    if let Some(values) = &args.sweep {
        return run_sweep(values, |n| shoot_one(args, n, &args.output.sweep_paths(&default_name, &tag("n", n))));
    }
    let n = args.n.ok_or_else(|| invalid("--n is required"))?;
    let row = shoot_one(args, n, &args.output.paths(&format!("{}_{}", default_name, tag("n", n))))?;
    print_json(&row);
    Ok(())
}

fn limit_cmd(args: &LimitArgs) -> CmdResult {
    if args.zeros == 0 {
        return Err(invalid("--zeros must be positive"));
    }
    let seq = limit_zeros(args.l, args.zeros)?;
    let gaps: Vec<f64> = seq.zeros.windows(2).map(|w| w[1] - w[0]).collect();
    let config = json!({ "command": "limit", "l": args.l, "zeros": args.zeros, "per_piece": args.per_piece });
    let mut out = json!({ "config": config, "l": args.l, "zeros": seq.zeros, "gaps": gaps });
    if args.write_profile {
        let pc = build_piecewise(args.l, args.zeros)?;
        let profile = pc.to_profile(args.per_piece.max(2));
        let paths = args.output.paths(&format!("limit_l{}", args.l));
        let report = check_profile(&profile, args.l, ENVELOPE_WINDOW);
        let meta = json!({ "config": config, "zeros": seq.zeros });
        write_bundle(&paths, &profile, meta, &report)?;
        out["csv"] = json!(paths.csv);
    }
    print_json(&out);
    Ok(())
}

fn vss_json(prob: &VssProblem, sol: Option<&VssSolution>, residual: f64, converged: bool) -> Value {
    json!({
        "n": prob.n,
        "p": prob.p,
        "alpha": prob.params.alpha,
        "beta": prob.params.beta,
        "residual_norm": residual,
        "hump_amplitude": sol.map(|s| s.hump_amplitude),
        "converged": converged,
    })
}

fn vss_one(args: &VssArgs, n: f64, paths: &OutputPaths) -> Result<Value, Failure> {
    let prob = VssProblem::with_step(n, args.p, args.y0, args.length, args.step)?.with_closure(args.closure.into());
    let config = json!({
        "command": "vss", "n": n, "p": args.p, "y0": args.y0, "length": args.length,
        "step": prob.step(), "mesh": prob.mesh, "closure": prob.closure, "tol": args.tol,
    });
    match solve_vss(&prob, args.tol) {
        Ok(sol) => {
            let mut out = vss_json(&prob, Some(&sol), sol.residual_norm, true);
            let meta = json!({
                "config": config, "result": out.clone(), "c": sol.state.c,
                "half_period_steps": sol.half_period_steps, "warnings": sol.warnings,
            });
            let mut report = DiagnosticsReport::default();
            report.push(ndeig_core::diagnostics::Check::at_most("residual_norm", sol.residual_norm, args.tol));
            write_bundle(paths, &sol.profile, meta, &report)?;
            for w in &sol.warnings {
                eprintln!("warning: {w}");
            }
            out["csv"] = json!(paths.csv);
            Ok(out)
        }
        Err(Error::NoConvergence { residual, best }) => {
            let out = vss_json(&prob, None, residual, false);
            let meta = json!({ "config": config, "result": out.clone(), "warnings": prob.warnings() });
            let mut report = DiagnosticsReport::default();
            report.push(ndeig_core::diagnostics::Check::at_most("residual_norm", residual, args.tol));
            write_bundle(paths, &best, meta, &report)?;
            print_json(&out);
            Err(Failure {
                code: EXIT_NO_CONVERGENCE,
                message: format!("no convergence: maximal residual {residual:e}; best iterate in {}", paths.csv.display()),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn vss_cmd(args: &VssArgs) -> CmdResult {
    let default_name = format!("vss_{}", tag("p", args.p));
    if let Some(values) = &args.sweep {
        return run_sweep(values, |n| vss_one(args, n, &args.output.sweep_paths(&default_name, &tag("n", n))));
    }
    let n = args.n.ok_or_else(|| invalid("--n is required"))?;
    let row = vss_one(args, n, &args.output.paths(&format!("{}_{}", default_name, tag("n", n))))?;
    print_json(&row);
    Ok(())
}

fn check_cmd(args: &CheckArgs) -> CmdResult {
    if !(args.window_lo < args.window_hi) {
        return Err(invalid("need window_lo < window_hi"));
    }
    let paths = OutputPaths::from_csv_path(&args.profile);
    let profile = read_profile(&paths)?;
    let l = args.l.or(profile.meta.l).unwrap_or(0);
    if l > 2 {
        return Err(invalid(format!("l={l} must be 0, 1 or 2")));
    }
    let report = check_profile(&profile, l, (args.window_lo, args.window_hi));
    write_json(&paths.diag, &report)?;
    print_json(&json!({
        "config": {
            "command": "check", "profile": args.profile, "l": l,
            "window": [args.window_lo, args.window_hi],
        },
        "passed": report.passed(),
        "report": report,
    }));
    Ok(())
}

fn compare_cmd(args: &CompareArgs) -> CmdResult {
    let points = homotopy_compare(&args.n_list, args.l)?;
    let decreasing = points.windows(2).all(|w| w[1].distance < w[0].distance);
    print_json(&json!({
        "config": { "command": "compare-linear", "l": args.l, "n_list": args.n_list },
        "points": points,
        "strictly_decreasing": decreasing,
    }));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eigen(a) => eigen(a),
        Command::Shoot(a) => shoot_cmd(a),
        Command::Limit(a) => limit_cmd(a),
        Command::Vss(a) => vss_cmd(a),
        Command::Check(a) => check_cmd(a),
        Command::CompareLinear(a) => compare_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
