//! Command-line driver: convergence studies, single solves, data verification and property checks.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver failure, 3 check failure.

pub mod config;
pub mod props;
pub mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::analysis::convergence_study;
use crate::error::{Error, Result};
use crate::optctl::OcpSystem;
pub use config::{Norms, StudyConfig};

#[derive(Debug, Parser)]
#[command(name = "nxfem", version, about = "Nitsche-XFEM solver for elliptic interface optimal control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convergence study over the configured meshes; writes study.csv and study.md.
    Study(Overrides),
    /// Single solve on one mesh; writes a field dump at the quadrature points.
    Solve(Overrides),
    /// Finite-difference verification of the manufactured data.
    Verify(Overrides),
    /// Discretization property suite.
    Props(Overrides),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Configuration file with `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub example: Option<u8>,
    /// Mesh subdivisions; a comma-separated list for studies.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub ctilde: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<StudyConfig> {
        let mut cfg = match &self.config {
            Some(path) => StudyConfig::load(path)?,
            None => StudyConfig::default(),
        };
        if let Some(e) = self.example {
            cfg.example = e;
        }
        if !self.n.is_empty() {
            cfg.meshes = self.n.clone();
        }
        if self.ctilde.is_some() {
            cfg.ctilde = self.ctilde;
        }
        if self.nu.is_some() {
            cfg.nu = self.nu;
        }
        if let Some(t) = self.theta {
            cfg.fixed_point.theta = t;
        }
        if let Some(t) = self.tol {
            cfg.fixed_point.tol = t;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Outcome of a subcommand, before it becomes a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    ConfigError,
    SolverFailure,
    CheckFailure,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::ConfigError => 1,
            Status::SolverFailure => 2,
            Status::CheckFailure => 3,
        }
    }
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s.code())
    }
}

pub fn status_of(err: &Error) -> Status {
    match err {
        Error::NonConvergence { .. } | Error::Breakdown(_) | Error::NotPositiveDefinite { .. } => Status::SolverFailure,
        Error::CheckFailed { .. } => Status::CheckFailure,
        _ => Status::ConfigError,
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

pub fn run_study(cfg: &StudyConfig, log: &mut dyn std::io::Write) -> Result<Status> {
    let spec = cfg.problem()?;
    let rows = convergence_study(&spec, &cfg.meshes, cfg.solver, cfg.fixed_point);
    let title = cfg.title.clone().unwrap_or_else(|| spec.name.clone());
    let csv = report::study_csv(&rows, spec.error_mode);
    let md = report::study_markdown(&title, &rows, spec.error_mode, cfg.norms);
    write_file(&cfg.out, "study.csv", &csv)?;
    write_file(&cfg.out, "study.md", &md)?;
    write!(log, "{md}")?;
    for r in rows.iter().filter(|r| !r.ok()) {
        let reason = r.failure.as_deref().unwrap_or("fixed point did not converge");
        writeln!(log, "N={}: {reason}", r.n)?;
    }
    Ok(if rows.iter().all(|r| r.ok()) { Status::Success } else { Status::SolverFailure })
}

pub fn run_solve(cfg: &StudyConfig, log: &mut dyn std::io::Write) -> Result<Status> {
    let spec = cfg.problem()?;
    let &[n] = cfg.meshes.as_slice() else {
        return Err(Error::Config(format!("solve needs exactly one mesh size, got {:?}", cfg.meshes)));
    };
    let system = OcpSystem::new(&spec, n, cfg.solver)?;
    let sol = system.solve(cfg.fixed_point)?;
    let path = write_file(&cfg.out, &format!("fields_n{n}.csv"), &report::field_dump_csv(&system, &sol))?;
    writeln!(
        log,
        "{}: N={n}, {} unknowns, {} iteration(s), converged={}, control change {}, residuals {} {}\nwrote {}",
        spec.name,
        system.num_free(),
        sol.iterations,
        sol.converged,
        report::sci(sol.control_change),
        report::sci(sol.residuals[0]),
        report::sci(sol.residuals[1]),
        path.display()
    )?;
    Ok(if sol.converged { Status::Success } else { Status::SolverFailure })
}

fn print_checks(lines: &[props::CheckLine], log: &mut dyn std::io::Write) -> Result<Status> {
    for c in lines {
        writeln!(log, "[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
    }
    Ok(if lines.iter().all(|c| c.passed) { Status::Success } else { Status::CheckFailure })
}

pub fn run_verify(cfg: &StudyConfig, log: &mut dyn std::io::Write) -> Result<Status> {
    let spec = cfg.problem()?;
    writeln!(log, "{}", spec.name)?;
    print_checks(&props::manufactured(&spec, cfg.samples, cfg.seed), log)
}

pub fn run_props(cfg: &StudyConfig, log: &mut dyn std::io::Write) -> Result<Status> {
    let spec = cfg.problem()?;
    let n_small = cfg.meshes[0];
    writeln!(log, "{} (N={n_small})", spec.name)?;
    print_checks(&props::run_props(&spec, n_small, 32, cfg.samples, cfg.seed)?, log)
}

type Action = fn(&StudyConfig, &mut dyn std::io::Write) -> Result<Status>;

/// Runs a parsed command line, reporting errors on `log`.
pub fn run(cli: &Cli, log: &mut dyn std::io::Write) -> Status {
    let (overrides, action): (&Overrides, Action) = match &cli.command {
        Command::Study(o) => (o, run_study),
        Command::Solve(o) => (o, run_solve),
        Command::Verify(o) => (o, run_verify),
        Command::Props(o) => (o, run_props),
    };
    let result = overrides.resolve().and_then(|cfg| action(&cfg, log));
    match result {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            status_of(&e)
        }
    }
}
