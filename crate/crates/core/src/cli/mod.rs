//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed reproduction or solver failure,
//! 2 infeasible demand, 3 invalid configuration or arguments,
//! 4 unsupported network shape, 5 I/O failure.

pub mod config;
pub mod reproduce;
pub mod svg;
pub mod sweep;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::charac::thresholds;
use crate::cost::cost_report;
use crate::error::SolverError;
use config::{validate_sweep, ScenarioConfig, SweepConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{0}")]
    Infeasible(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::InvalidConfig(_) => 3,
            CliError::Unsupported(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InfeasibleDemand { .. } => CliError::Infeasible(e.to_string()),
            SolverError::Unsupported(_) | SolverError::TooLarge { .. } => {
                CliError::Unsupported(e.to_string())
            }
            SolverError::InvalidModel(_) => CliError::InvalidConfig(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "commonlines",
    version,
    about = "Equilibrium and optimal loads of common transit lines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Equilibrium and optimal flows, social costs and price of anarchy at one demand.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Demand in passengers/hour; defaults to the scenario's `demand`.
        #[arg(long, allow_negative_numbers = true)]
        demand: Option<f64>,
    },
    /// Demand thresholds at which the second line starts being used (two lines only).
    Thresholds {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solves a range of demands and writes CSV, optionally with SVG charts.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Runs a built-in scenario ("a": queue family, "b": power family) against reference values.
    Reproduce { which: String },
}

/// Formats with 6 significant digits.
pub fn fmt6(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return if value == 0.0 {
            "0".into()
        } else {
            value.to_string()
        };
    }
    let rounded: f64 = format!("{value:.5e}")
        .parse()
        .expect("formatted float parses");
    if rounded.abs() >= 1e-4 && rounded.abs() < 1e15 {
        rounded.to_string()
    } else {
        format!("{rounded:e}")
    }
}

fn load(path: &Path) -> Result<(ScenarioConfig, crate::model::Network), CliError> {
    let cfg = ScenarioConfig::load(path)?;
    let network = cfg.validated()?;
    Ok((cfg, network))
}

fn cmd_solve(path: &Path, demand: Option<f64>) -> Result<String, CliError> {
    let (cfg, network) = load(path)?;
    let x = demand
        .or(cfg.demand)
        .ok_or_else(|| CliError::InvalidConfig("no demand given (use --demand)".into()))?;
    let report = cost_report(&network, x)?;
    let ue = network.to_input_order(&report.ue_flows.v);
    let so = network.to_input_order(&report.so_flows.v);
    let mut out = String::new();
    let _ = writeln!(out, "demand {}", fmt6(x));
    let _ = writeln!(out, "{:<6}{:>12}{:>12}{:>12}", "line", "t", "v_ue", "v_so");
    for (i, line) in cfg.lines.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:<6}{:>12}{:>12}{:>12}",
            i + 1,
            fmt6(line.t),
            fmt6(ue[i]),
            fmt6(so[i])
        );
    }
    let _ = writeln!(out, "WSC {}", fmt6(report.wsc));
    let _ = writeln!(out, "OSC {}", fmt6(report.osc));
    let _ = writeln!(out, "PoA {}", fmt6(report.poa));
    let _ = writeln!(
        out,
        "equilibrium: alpha {} T_hat {}",
        fmt6(report.ue_flows.alpha),
        report.ue_flows.t_hat.map_or("-".into(), fmt6)
    );
    let _ = writeln!(
        out,
        "optimum: alpha {} lambda_bar {}",
        fmt6(report.so_flows.alpha),
        report.so_flows.lambda_bar.map_or("-".into(), fmt6)
    );
    Ok(out)
}

fn cmd_thresholds(path: &Path) -> Result<String, CliError> {
    let (_, network) = load(path)?;
    let report = thresholds(&network)?;
    let mut out = String::new();
    for (label, t) in [("so", report.social_optimum), ("w", report.equilibrium)] {
        match t {
            Some(t) => {
                let _ = writeln!(out, "l_{label} {}", fmt6(t.lower));
                let _ = writeln!(out, "u_{label} {}", fmt6(t.upper));
                let _ = writeln!(out, "alpha_{label} {}", fmt6(t.alpha));
            }
            None => {
                let _ = writeln!(
                    out,
                    "l_{label} -  (both lines used from the first passenger)"
                );
                let _ = writeln!(out, "u_{label} -");
            }
        }
    }
    Ok(out)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn cmd_sweep(
    path: &Path,
    from: Option<f64>,
    to: Option<f64>,
    steps: Option<usize>,
    out: &Path,
    svg_path: Option<&Path>,
) -> Result<String, CliError> {
    let (cfg, network) = load(path)?;
    let pick = |arg: Option<f64>, field: fn(&SweepConfig) -> f64, name: &str| {
        arg.or(cfg.sweep.as_ref().map(field))
            .ok_or_else(|| CliError::InvalidConfig(format!("no sweep {name} given (use --{name})")))
    };
    let range = SweepConfig {
        from: pick(from, |s| s.from, "from")?,
        to: pick(to, |s| s.to, "to")?,
        steps: steps
            .or(cfg.sweep.map(|s| s.steps))
            .ok_or_else(|| CliError::InvalidConfig("no sweep steps given (use --steps)".into()))?,
    };
    validate_sweep(&network, range)?;
    let rows = sweep::sweep(&network, range.from, range.to, range.steps)?;
    let n = network.len();
    write_file(out, &sweep::to_csv(&rows, n))?;
    let mut msg = format!("wrote {} rows to {}\n", rows.len(), out.display());
    if let Some(svg_path) = svg_path {
        write_file(svg_path, &svg::render(&rows, n))?;
        let _ = writeln!(msg, "wrote charts to {}", svg_path.display());
    }
    Ok(msg)
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Solve { config, demand } => cmd_solve(&config, demand).map(|s| (s, true)),
        Command::Thresholds { config } => cmd_thresholds(&config).map(|s| (s, true)),
        Command::Sweep {
            config,
            from,
            to,
            steps,
            out,
            svg,
        } => cmd_sweep(&config, from, to, steps, &out, svg.as_deref()).map(|s| (s, true)),
        Command::Reproduce { which } => reproduce::reproduce(&which),
    };
    match result {
        Ok((text, ok)) => {
            let _ = write!(stdout, "{text}");
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
