//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;

use crate::analytic::BivariateSeries;
use crate::ensemble::{demos, gram_residual, profile_from_series, EnsembleSystem};
use crate::error::{Error, Result};
use crate::io::{read_json, to_json_string, NormalFormJson, ReportJson, SeriesJson, SystemJson};
use crate::reduction::{run_pipeline, BranchOptions, NormalFormOptions, PipelineOptions, SliceOptions};
use crate::witness::{
    build_witness_with, CertificateJson, WitnessOptions, DEFAULT_K_MAX, DEFAULT_TOLERANCE,
};

type C64 = Complex64;

pub const THREADS_ENV: &str = "ENSEMBLECTL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ensemblectl", version, about = "Controllability certificates for linear ensemble systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a witness certificate for a normal-form input list.
    Witness(RunArgs),
    /// Residual curves of target profiles against the Krylov span.
    Analyze(RunArgs),
    /// Reduce a matrix ensemble and certify the resulting scalar pair.
    Reduce(RunArgs),
    /// Residual curve of ẋ = σx + u on [0, 1].
    Demo1d(RunArgs),
    /// Residual curve of ẋ = σx + u on the unit disk.
    Demo2d(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Input JSON file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Largest power K.
    #[arg(long)]
    pub kmax: Option<u32>,
    /// Radial (or interval) grid nodes.
    #[arg(long = "grid-r")]
    pub grid_r: Option<usize>,
    /// Angular grid nodes.
    #[arg(long = "grid-theta")]
    pub grid_theta: Option<usize>,
    /// Total degree of the normal-form fit.
    #[arg(long = "fit-degree")]
    pub fit_degree: Option<u32>,
    /// Relative tolerance of the certificate checks.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Target profile: a series literal, or `@file` holding a series or
    /// `{"samples": [[re, im], ...]}`. Repeatable.
    #[arg(long)]
    pub target: Vec<String>,
    /// Witness certificate used for a lower-bound column.
    #[arg(long)]
    pub certificate: Option<PathBuf>,
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Usage = 1,
    Failed = 2,
}

/// Exit status for an error.
pub fn status_of(err: &Error) -> Status {
    match err {
        Error::Parse(_)
        | Error::Json(_)
        | Error::Csv(_)
        | Error::Io(_)
        | Error::Dimension(_)
        | Error::InvalidArgument(_) => Status::Usage,
        _ => Status::Failed,
    }
}

impl RunArgs {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("--kmax", self.kmax.map(|v| v as f64)),
            ("--grid-r", self.grid_r.map(|v| v as f64)),
            ("--grid-theta", self.grid_theta.map(|v| v as f64)),
            ("--fit-degree", self.fit_degree.map(|v| v as f64)),
            ("--tol", self.tol),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) && !(name == "--kmax" && v == 0.0) {
                    return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }

    fn input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("--input is required".into()))
    }

    fn witness_options(&self) -> WitnessOptions {
        WitnessOptions {
            k_max: self.kmax.unwrap_or(DEFAULT_K_MAX),
            tolerance: self.tol.unwrap_or(DEFAULT_TOLERANCE),
        }
    }
}

/// Sets up the worker pool from `ENSEMBLECTL_THREADS`.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    // a second initialization in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs one command and returns its exit status.
pub fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Witness(a) => cmd_witness(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Reduce(a) => cmd_reduce(&a),
        Command::Demo1d(a) => cmd_demo1d(&a),
        Command::Demo2d(a) => cmd_demo2d(&a),
    }
}

pub fn cmd_witness(args: &RunArgs) -> Result<Status> {
    args.validate()?;
    let nf: NormalFormJson = read_json(args.input()?)?;
    let b = nf.inputs()?;
    let cert = build_witness_with(&b, nf.r, &args.witness_options())?;
    write_out(args.out.as_deref(), &to_json_string(&CertificateJson::from(&cert))?)?;
    Ok(if cert.is_sound() { Status::Ok } else { Status::Failed })
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TargetJson {
    Samples { samples: Vec<[f64; 2]> },
    Series(SeriesJson),
}

enum Target {
    Series(BivariateSeries),
    Samples(Vec<C64>),
}

fn parse_target(raw: &str) -> Result<Target> {
    let text = match raw.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)?,
        None => raw.to_string(),
    };
    let t: TargetJson = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("target {raw:?}: {e}")))?;
    Ok(match t {
        TargetJson::Samples { samples } => Target::Samples(samples.iter().map(|c| C64::new(c[0], c[1])).collect()),
        TargetJson::Series(s) => Target::Series(s.to_series()?),
    })
}

fn target_path(out: Option<&Path>, i: usize, count: usize) -> Option<PathBuf> {
    let out = out?;
    if count == 1 {
        return Some(out.to_path_buf());
    }
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    Some(out.with_file_name(format!("{stem}_t{i}{ext}")))
}

/// Residual CSV text, `K,residual[,witness_bound]`.
pub fn residual_csv(residuals: &[f64], bound: Option<f64>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match bound {
        Some(_) => w.write_record(["K", "residual", "witness_bound"])?,
        None => w.write_record(["K", "residual"])?,
    }
    for (k, r) in residuals.iter().enumerate() {
        let mut rec = vec![k.to_string(), format!("{r:.16e}")];
        if let Some(b) = bound {
            rec.push(format!("{b:.16e}"));
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn analyze_system(sys: &EnsembleSystem, args: &RunArgs, default_targets: &[&str]) -> Result<Status> {
    let k_max = args.kmax.unwrap_or(10) as usize;
    let raw_targets: Vec<String> = if args.target.is_empty() {
        default_targets.iter().map(|s| s.to_string()).collect()
    } else {
        args.target.clone()
    };
    if raw_targets.is_empty() {
        return Err(Error::InvalidArgument("at least one --target is required".into()));
    }
    let cert = match &args.certificate {
        Some(p) => Some(read_json::<CertificateJson>(p)?),
        None => None,
    };
    for (i, raw) in raw_targets.iter().enumerate() {
        let target = parse_target(raw)?;
        let profile = match &target {
            Target::Series(s) => {
                if sys.n != 1 {
                    return Err(Error::Dimension(format!("series targets need n = 1, system has n = {}", sys.n)));
                }
                profile_from_series(&sys.space, s)?
            }
            Target::Samples(v) => v.clone(),
        };
        let res = gram_residual(sys, &profile, k_max)?;
        let bound = match (&cert, &target) {
            (Some(c), Target::Series(s)) => Some(bound_from_json(c, s)?),
            (Some(_), Target::Samples(_)) => {
                return Err(Error::InvalidArgument("witness bounds need series targets".into()))
            }
            (None, _) => None,
        };
        write_out(target_path(args.out.as_deref(), i, raw_targets.len()).as_deref(), &residual_csv(&res, bound)?)?;
    }
    Ok(Status::Ok)
}

fn bound_from_json(cert: &CertificateJson, target: &BivariateSeries) -> Result<f64> {
    let f0 = cert.f0()?;
    let norm = cert.f0_norm;
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument("certificate has a zero witness".into()));
    }
    Ok(f0.inner_series(target)?.norm() / norm)
}

pub fn cmd_analyze(args: &RunArgs) -> Result<Status> {
    args.validate()?;
    let sys: SystemJson = read_json(args.input()?)?;
    let sys = sys.build(args.grid_r, args.grid_theta)?;
    analyze_system(&sys, args, &[])
}

pub fn cmd_reduce(args: &RunArgs) -> Result<Status> {
    args.validate()?;
    let input: SystemJson = read_json(args.input()?)?;
    let sys = input.build(args.grid_r, args.grid_theta)?;
    let opts = PipelineOptions {
        branch: BranchOptions {
            seed: input.seed.clone(),
            ..BranchOptions::default()
        },
        slice: SliceOptions {
            tolerance: args.tol.map_or(SliceOptions::default().tolerance, |t| t.max(1e-8)),
            ..SliceOptions::default()
        },
        normal_form: NormalFormOptions {
            degree: args.fit_degree.unwrap_or(NormalFormOptions::default().degree),
            ..NormalFormOptions::default()
        },
        witness: args.witness_options(),
    };
    let rep = run_pipeline(&sys, &opts)?;
    let json = ReportJson::new(&rep, &sys.space);
    write_out(args.out.as_deref(), &to_json_string(&json)?)?;
    if let (Some(out), Some(nf), Some(cert)) = (&args.out, &json.normal_form, &json.certificate) {
        std::fs::write(sibling(out, "normal_form"), to_json_string(nf)?)?;
        std::fs::write(sibling(out, "certificate"), to_json_string(cert)?)?;
    }
    Ok(if json.verified { Status::Ok } else { Status::Failed })
}

/// `dir/stem.tag.json` next to `out`.
pub fn sibling(out: &Path, tag: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{tag}.json"))
}

pub fn cmd_demo1d(args: &RunArgs) -> Result<Status> {
    args.validate()?;
    let sys = demos::interval_demo(args.grid_r.unwrap_or(256))?;
    analyze_system(&sys, args, &["[[1, 0, [1, 0]]]"])
}

pub fn cmd_demo2d(args: &RunArgs) -> Result<Status> {
    args.validate()?;
    let k = args.kmax.unwrap_or(10) as usize;
    let sys = demos::disk_demo(1.0, args.grid_r.unwrap_or(32), args.grid_theta.unwrap_or((4 * k + 8).max(64)))?;
    analyze_system(&sys, args, &["[[0, 1, [1, 0]]]"])
}

/// Entry point used by the binary: parses arguments, runs, reports errors on
/// standard error and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::Usage as i32 } else { Status::Ok as i32 };
        }
    };
    let result = init_threads().and_then(|_| run(cli));
    match result {
        Ok(s) => s as i32,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Degenerate { dependent } = e.root() {
                eprintln!("dependent inputs: {dependent:?}");
            }
            status_of(&e) as i32
        }
    }
}
