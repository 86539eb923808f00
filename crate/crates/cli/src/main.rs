//! `mpsolve`: batch front-end for the signed multiple-solution solver.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mpsolve_core::{
    analyze_h_with_tol, check_hypotheses, lambda1_with_tol, prepare, run, write_profile,
    HCurveConstants, RunConfig, RunMode, RunOutcome, RunStatus, Solution, SolutionKind,
};
use serde::{Deserialize, Serialize};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_PARTIAL: u8 = 3;
const EXIT_NONE: u8 = 4;

#[derive(Parser)]
#[command(name = "mpsolve", version, about = "Signed minima and mountain-pass solutions of quasilinear Dirichlet problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Both minima and both mountain-pass points.
    Full(Common),
    /// The two negative-level minima only.
    Minimize(Common),
    /// The mountain-pass points (the minima are computed as path anchors).
    MountainPass(Common),
    /// Maximum and zeros of the h-curve, as JSON.
    AnalyzeH(Common),
    /// The threshold λ₁, as JSON.
    Lambda1(Common),
    /// Sampling certificate of the structural hypotheses, as JSON.
    CheckHypotheses(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration (or h-curve constants for analyze-h / lambda1).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Report destination; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Directory for solution profiles (CSV).
    #[arg(long, value_name = "DIR", default_value = "profiles")]
    profiles: PathBuf,
    /// Print per-iteration CSV rows to stderr.
    #[arg(long)]
    trace: bool,
    /// Seed for hypothesis sampling and embedding starts.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

/// h-curve constants given directly; `lambda` is ignored by `lambda1`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantsInput {
    alpha1: f64,
    c_q: f64,
    c_s: f64,
    p: f64,
    q: f64,
    s: f64,
    #[serde(default)]
    lambda: Option<f64>,
    #[serde(default)]
    bisection_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum CurveInput {
    Constants(ConstantsInput),
    Run(Box<RunConfig>),
}

#[derive(Serialize)]
struct Lambda1Output {
    lambda1: f64,
}

enum Failure {
    Config(String),
    Other(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Other(e.to_string())
    }
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn load_config(c: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::from_json(&read_text(&c.config)?).map_err(config_err)?;
    if c.seed.is_some() {
        cfg.seed = c.seed;
    }
    if c.trace {
        cfg.solver.trace = true;
    }
    Ok(cfg)
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn profile_name(s: &Solution) -> String {
    let kind = match s.kind {
        SolutionKind::Minimum => "minimum",
        SolutionKind::MountainPass => "mountain_pass",
    };
    format!("{kind}_{}.csv", format!("{:?}", s.sign).to_lowercase())
}

fn write_trace(outcome: &RunOutcome) -> io::Result<()> {
    let mut err = io::stderr().lock();
    writeln!(err, "stage,sign,iteration,energy,residual,seminorm")?;
    for s in &outcome.solutions {
        let stage = match s.kind {
            SolutionKind::Minimum => "minimize",
            SolutionKind::MountainPass => "mountain_pass",
        };
        let sign = format!("{:?}", s.sign).to_lowercase();
        for r in &s.trace {
            writeln!(err, "{stage},{sign},{},{},{},{}", r.iteration, r.energy, r.residual, r.seminorm)?;
        }
    }
    Ok(())
}

fn solve(c: &Common, mode: RunMode) -> Result<ExitCode, Failure> {
    let cfg = load_config(c)?;
    let mut outcome = run(&cfg, mode).map_err(config_err)?;
    if c.trace {
        write_trace(&outcome)?;
    }
    if !outcome.solutions.is_empty() {
        fs::create_dir_all(&c.profiles)?;
    }
    for (summary, sol) in outcome.report.solutions.iter_mut().zip(&outcome.solutions) {
        let path = c.profiles.join(profile_name(sol));
        let mut w = BufWriter::new(File::create(&path)?);
        write_profile(&sol.u, &mut w)?;
        w.flush()?;
        summary.profile = Some(path.display().to_string());
    }
    emit_json(&outcome.report, c.out.as_deref())?;
    for f in &outcome.report.failures {
        log::warn!("{f}");
    }
    Ok(match outcome.report.status {
        RunStatus::Complete => ExitCode::SUCCESS,
        RunStatus::Partial => ExitCode::from(EXIT_PARTIAL),
        RunStatus::NoSolutions => ExitCode::from(EXIT_NONE),
    })
}

fn curve_constants(c: &Common, need_lambda: bool) -> Result<(HCurveConstants, f64), Failure> {
    let input: CurveInput = serde_json::from_str(&read_text(&c.config)?).map_err(|e| {
        Failure::Config(format!("{}: neither h-curve constants nor a run config ({e})", c.config.display()))
    })?;
    match input {
        CurveInput::Constants(k) => {
            let lambda = match (k.lambda, need_lambda) {
                (Some(l), _) => l,
                (None, false) => 1.0,
                (None, true) => return Err(Failure::Config("analyze-h needs `lambda`".into())),
            };
            let tol = k.bisection_tol.unwrap_or(mpsolve_core::truncation::DEFAULT_BISECTION_TOL);
            let constants = HCurveConstants {
                alpha1: k.alpha1,
                c_q: k.c_q,
                c_s: k.c_s,
                lambda,
                p: k.p,
                q: k.q,
                s: k.s,
            };
            constants.validate().map_err(config_err)?;
            Ok((constants, tol))
        }
        CurveInput::Run(mut cfg) => {
            cfg.seed = c.seed.or(cfg.seed);
            let prep = prepare(&cfg).map_err(config_err)?;
            Ok((prep.constants, cfg.bisection_tol))
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Full(c) => solve(&c, RunMode::Full),
        Command::Minimize(c) => solve(&c, RunMode::MinimaOnly),
        Command::MountainPass(c) => solve(&c, RunMode::MountainPassOnly),
        Command::AnalyzeH(c) => {
            let (k, tol) = curve_constants(&c, true)?;
            emit_json(&analyze_h_with_tol(&k, tol).map_err(config_err)?, c.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Lambda1(c) => {
            let (k, tol) = curve_constants(&c, false)?;
            let lambda1 = lambda1_with_tol(&k, tol).map_err(config_err)?;
            emit_json(&Lambda1Output { lambda1 }, c.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckHypotheses(c) => {
            let cfg = load_config(&c)?;
            let family = cfg.family().map_err(config_err)?;
            let report = check_hypotheses(&family, cfg.p, cfg.s, &cfg.sampling_plan());
            emit_json(&report, c.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("mpsolve: invalid configuration: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("mpsolve: {msg}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
