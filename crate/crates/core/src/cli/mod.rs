//! Command-line front end.

pub mod config;
pub mod figures;
pub mod output;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::continuation::{continue_branch, double_root_l1, locate_fold, BranchFamily, StepControl};
use crate::crack::{check_linear, check_nonlinear, CrackSpec, MatchMode, NonlinearControl, DEFAULT_TOL};
use crate::eigenfunction::{shoot, ShootControl};
use crate::error::Error;
use crate::ode::IntegratorControl;
use crate::pencil::{build_eigenfunction, exact_coefficients, Family, EXACT_DEGREE_LIMIT};
use crate::perturbation::{mu_via_ift, mu_via_quadrature, seed_pair, QuadratureControl};
use config::{load_config, List, Settings};
use figures::{char_scan, emit_figure, FigureDataset, DEFAULT_POINTS};
use output::{csv, envelope};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INADMISSIBLE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("expected csv or json, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ift,
    Quad,
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ift" => Ok(Method::Ift),
            "quad" => Ok(Method::Quad),
            _ => Err(format!("expected ift or quad, got `{s}`")),
        }
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "first" => Ok(Family::First),
            "second" => Ok(Family::Second),
            _ => Err(format!("expected first or second, got `{s}`")),
        }
    }
}

impl FromStr for BranchFamily {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "upper" => Ok(BranchFamily::Upper),
            "lower" => Ok(BranchFamily::Lower),
            _ => Err(format!("expected upper or lower, got `{s}`")),
        }
    }
}

impl FromStr for MatchMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "consecutive" => Ok(MatchMode::Consecutive),
            "any-subset" => Ok(MatchMode::AnySubset),
            "all-zeros" => Ok(MatchMode::AllZeros),
            _ => Err(format!("expected consecutive, any-subset or all-zeros, got `{s}`")),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "crack-pencil",
    version,
    about = "Pencil spectra, nonlinear eigenvalue folds and crack admissibility"
)]
pub struct Cli {
    /// `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Also write the JSON record here when emitting CSV.
    #[arg(long, global = true)]
    summary: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monic pencil eigenfunction of a given degree and family.
    Pencil {
        #[arg(long)]
        degree: Option<u32>,
        #[arg(long)]
        family: Option<String>,
    },
    /// Characteristic quartic on a lambda grid for a list of n.
    CharScan {
        #[arg(long)]
        l: Option<u32>,
        #[arg(long = "n-list")]
        n_list: Option<String>,
        #[arg(long = "lambda-min", allow_hyphen_values = true)]
        lambda_min: Option<f64>,
        #[arg(long = "lambda-max", allow_hyphen_values = true)]
        lambda_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Fold point of the characteristic quartic.
    Fold {
        #[arg(long)]
        l: Option<u32>,
    },
    /// Continued real eigenvalue branch.
    Branch {
        #[arg(long)]
        l: Option<u32>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long = "n-max")]
        n_max: Option<f64>,
        #[arg(long = "initial-step")]
        initial_step: Option<f64>,
        #[arg(long = "max-step")]
        max_step: Option<f64>,
    },
    /// Branch slope at n = 0.
    Mu {
        #[arg(long)]
        l: Option<u32>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        method: Option<String>,
        #[arg(long = "tail-tol")]
        tail_tol: Option<f64>,
    },
    /// Shoot the nonlinear eigenfunction ODE from z = 0.
    Shoot {
        #[arg(long)]
        l: Option<u32>,
        #[arg(long)]
        n: Option<f64>,
        /// Defaults to the upper branch value at n.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        #[arg(long = "z-max")]
        z_max: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        rtol: Option<f64>,
        #[arg(long)]
        atol: Option<f64>,
    },
    /// Admissibility of a set of crack slopes.
    Crack {
        #[arg(long, allow_hyphen_values = true)]
        alphas: Option<String>,
        #[arg(long)]
        n: Option<f64>,
        #[arg(long = "l-max")]
        l_max: Option<u32>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        mode: Option<String>,
        /// Same as `--mode any-subset`.
        #[arg(long = "any-subset")]
        any_subset: bool,
    },
    /// Data behind one of the characteristic polynomial figures.
    Figure {
        #[arg(long)]
        id: Option<u32>,
        #[arg(long)]
        points: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Pencil { .. } => "pencil",
            Command::CharScan { .. } => "char-scan",
            Command::Fold { .. } => "fold",
            Command::Branch { .. } => "branch",
            Command::Mu { .. } => "mu",
            Command::Shoot { .. } => "shoot",
            Command::Crack { .. } => "crack",
            Command::Figure { .. } => "figure",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::CharScan { .. } | Command::Branch { .. } | Command::Shoot { .. } | Command::Figure { .. } => {
                Format::Csv
            }
            _ => Format::Json,
        }
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Domain { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// What a command produced: a JSON record and, for tabular commands, CSV.
struct Emission {
    record: Value,
    table: Option<String>,
    status: i32,
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, Failure> {
    Ok(serde_json::to_value(v)?)
}

fn figure_emission(ds: &FigureDataset) -> Result<Emission, Failure> {
    Ok(Emission {
        record: to_value(ds)?,
        table: Some(csv(&ds.header(), ds.rows())),
        status: EXIT_OK,
    })
}

fn execute(command: &Command, s: &mut Settings) -> Result<Emission, Failure> {
    match command {
        Command::Pencil { degree, family } => {
            let degree = s.required("degree", *degree)?;
            let family = s.value(
                "family",
                family.as_deref().map(str::parse).transpose().map_err(UsageError)?,
                Family::First,
            )?;
            let pair = build_eigenfunction(degree, family)?;
            let exact = if degree <= EXACT_DEGREE_LIMIT {
                Some(
                    exact_coefficients(degree, family)?
                        .iter()
                        .map(|c| c.to_string())
                        .collect::<Vec<_>>(),
                )
            } else {
                None
            };
            let coeffs = pair.poly.coeffs().to_vec();
            let table = csv(
                &["k".into(), "coefficient".into()],
                coeffs.iter().enumerate().map(|(k, &c)| vec![k as f64, c]),
            );
            Ok(Emission {
                record: serde_json::json!({
                    "degree": degree,
                    "family": family,
                    "lambda": pair.lambda,
                    "coefficients": coeffs,
                    "exact_coefficients": exact,
                }),
                table: Some(table),
                status: EXIT_OK,
            })
        }
        Command::CharScan {
            l,
            n_list,
            lambda_min,
            lambda_max,
            points,
        } => {
            let l = s.required("l", *l)?;
            let n_list: List<f64> = s.value(
                "n-list",
                n_list.as_deref().map(str::parse).transpose().map_err(UsageError)?,
                List(vec![0.0]),
            )?;
            let lo = s.optional("lambda-min", *lambda_min)?;
            let hi = s.optional("lambda-max", *lambda_max)?;
            let points = s.value("points", *points, DEFAULT_POINTS)?;
            let range = match (lo, hi) {
                (Some(a), Some(b)) => Some((a, b)),
                (None, None) => None,
                _ => {
                    return Err(Failure::Usage(
                        "give both --lambda-min and --lambda-max or neither".into(),
                    ))
                }
            };
            figure_emission(&char_scan(l, &n_list.0, range, points)?)
        }
        Command::Fold { l } => {
            let l = s.required("l", *l)?;
            let fold = if l == 1 { double_root_l1()? } else { locate_fold(l)? };
            Ok(Emission {
                record: to_value(&fold)?,
                table: Some(csv(
                    &["n".into(), "lambda".into()],
                    [vec![fold.n_star, fold.lambda_star]],
                )),
                status: EXIT_OK,
            })
        }
        Command::Branch {
            l,
            family,
            n_max,
            initial_step,
            max_step,
        } => {
            let l = s.required("l", *l)?;
            let family = s.value(
                "family",
                family.as_deref().map(str::parse).transpose().map_err(UsageError)?,
                BranchFamily::Upper,
            )?;
            let n_max = s.required("n-max", *n_max)?;
            let d = StepControl::default();
            let ctrl = StepControl {
                initial: s.tolerance("initial-step", *initial_step, d.initial)?,
                max_step: s.tolerance("max-step", *max_step, d.max_step)?,
                ..d
            };
            let branch = continue_branch(l, family, n_max, &ctrl)?;
            let table = csv(
                &["n".into(), "lambda".into()],
                branch.samples.iter().map(|&(n, x)| vec![n, x]),
            );
            Ok(Emission {
                record: to_value(&branch)?,
                table: Some(table),
                status: EXIT_OK,
            })
        }
        Command::Mu {
            l,
            family,
            method,
            tail_tol,
        } => {
            let l = s.required("l", *l)?;
            let family = s.value(
                "family",
                family.as_deref().map(str::parse).transpose().map_err(UsageError)?,
                Family::Second,
            )?;
            let method = s.value(
                "method",
                method.as_deref().map(str::parse).transpose().map_err(UsageError)?,
                Method::Ift,
            )?;
            let qc = QuadratureControl {
                tail_tol: s.tolerance("tail-tol", *tail_tol, QuadratureControl::default().tail_tol)?,
                ..QuadratureControl::default()
            };
            let pair = seed_pair(l, family)?;
            let ift = mu_via_ift(l, family)?;
            let quad = mu_via_quadrature(l, family, &qc)?;
            let mu = match method {
                Method::Ift => Some(ift),
                Method::Quad => quad.mu,
            };
            Ok(Emission {
                record: serde_json::json!({
                    "l": l,
                    "family": family,
                    "lambda": pair.lambda,
                    "method": method,
                    "mu": mu,
                    "ift": ift,
                    "quadrature": to_value(&quad)?,
                }),
                table: None,
                status: EXIT_OK,
            })
        }
        Command::Shoot {
            l,
            n,
            lambda,
            z_max,
            samples,
            rtol,
            atol,
        } => {
            let l = s.required("l", *l)?;
            let n = s.required("n", *n)?;
            let d = ShootControl::default();
            let ctrl = ShootControl {
                z_max: s.tolerance("z-max", *z_max, d.z_max)?,
                samples: s.value("samples", *samples, d.samples)?,
                integrator: IntegratorControl {
                    rtol: s.tolerance("rtol", *rtol, d.integrator.rtol)?,
                    atol: s.tolerance("atol", *atol, d.integrator.atol)?,
                    ..d.integrator
                },
                ..d
            };
            let lambda = match s.optional("lambda", *lambda)? {
                Some(x) => x,
                None => {
                    let b = continue_branch(l, BranchFamily::Upper, n, &StepControl::default())?;
                    let x = b.samples.last().expect("branch has samples").1;
                    if b.samples.last().map(|p| p.0) != Some(n) {
                        return Err(Failure::Numerical(format!("no real eigenvalue for l = {l} at n = {n}")));
                    }
                    s.record("lambda", &x);
                    x
                }
            };
            let sol = shoot(l, n, lambda, &ctrl)?;
            let table = csv(
                &["z".into(), "psi".into(), "dpsi".into()],
                sol.samples.iter().map(|&(z, p, dp)| vec![z, p, dp]),
            );
            Ok(Emission {
                record: serde_json::json!({
                    "l": sol.l,
                    "n": sol.n,
                    "lambda": sol.lambda,
                    "initial": sol.initial,
                    "zeros": to_value(&sol.zeros)?,
                    "growth_exponent": sol.growth_exponent,
                    "amplitude": sol.amplitude,
                    "degeneracy_events": sol.degeneracy_events,
                }),
                table: Some(table),
                status: EXIT_OK,
            })
        }
        Command::Crack {
            alphas,
            n,
            l_max,
            tol,
            mode,
            any_subset,
        } => {
            let alphas: List<f64> = s.required(
                "alphas",
                alphas.as_deref().map(str::parse).transpose().map_err(UsageError)?,
            )?;
            let spec = CrackSpec::new(alphas.0)?;
            let n = s.value("n", *n, 0.0)?;
            let l_max = s.value("l-max", *l_max, spec.default_l_max())?;
            let tol = s.tolerance("tol", *tol, DEFAULT_TOL)?;
            let flag_mode = match (mode.as_deref(), any_subset) {
                (Some(_), true) => return Err(Failure::Usage("use either --mode or --any-subset".into())),
                (Some(m), false) => Some(m.parse().map_err(UsageError)?),
                (None, true) => Some(MatchMode::AnySubset),
                (None, false) => None,
            };
            let mode = s.value("mode", flag_mode, MatchMode::Consecutive)?;
            let report = if n == 0.0 {
                check_linear(&spec, l_max, tol, mode)?
            } else {
                check_nonlinear(&spec, n, l_max, tol, mode, &NonlinearControl::default())?
            };
            Ok(Emission {
                record: to_value(&report)?,
                table: None,
                status: if report.admissible { EXIT_OK } else { EXIT_INADMISSIBLE },
            })
        }
        Command::Figure { id, points } => {
            let id = s.required("id", *id)?;
            let points = s.value("points", *points, DEFAULT_POINTS)?;
            figure_emission(&emit_figure(id, points)?)
        }
    }
}

fn write_to(path: Option<&PathBuf>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let file = match &cli.config {
        Some(p) => load_config(p)?,
        None => BTreeMap::new(),
    };
    let mut s = Settings::new(file);
    let command = &cli.command;
    let format = s.value(
        "format",
        cli.format.as_deref().map(str::parse).transpose().map_err(UsageError)?,
        command.default_format(),
    )?;
    let emission = execute(command, &mut s)?;
    let resolved = s.finish()?;
    let json = envelope(command.name(), &resolved, &emission.record)?;
    match (format, &emission.table) {
        (Format::Csv, Some(table)) => {
            write_to(cli.output.as_ref(), table, out)?;
            if let Some(p) = &cli.summary {
                write_to(Some(p), &json, out)?;
            }
        }
        (Format::Csv, None) => {
            return Err(Failure::Usage(format!("`{}` has no CSV form", command.name())));
        }
        (Format::Json, _) => write_to(cli.output.as_ref(), &json, out)?,
    }
    Ok(emission.status)
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::Numerical(m) | Failure::Io(m) => (EXIT_NUMERICAL, m),
            };
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}
