//! Command-line front end for convergence studies.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};

use crate::error::{Error, Result};
use crate::law::ForchheimerLaw;
use crate::mms::{convergence_study, ConvergenceReport, ManufacturedSolution, StudyConfig, TimeStepPolicy};
use crate::solver::LinearSolve;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Markdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinearArg {
    Condensed,
    Monolithic,
}

/// `--dt` value: a fixed step or `h2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtArg {
    Fixed(f64),
    MeshSquared,
}

impl FromStr for DtArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("h2") {
            return Ok(DtArg::MeshSquared);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(DtArg::Fixed(v)),
            _ => Err(format!("expected a positive number or \"h2\", got {s:?}")),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "forchheimer",
    version,
    about = "Convergence study for the expanded mixed method on generalized Forchheimer flow",
    args_override_self = true
)]
struct Args {
    /// Law as comma-separated coefficient:exponent pairs
    #[arg(long, default_value = "1:0,1:1")]
    law: String,

    /// Mesh sizes (cells per side), comma separated
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64,128,256")]
    mesh: Vec<usize>,

    /// Time step: a number, or h2 for min(dt-cap, h^2)
    #[arg(long, default_value = "h2")]
    dt: DtArg,

    #[arg(long = "dt-cap", default_value_t = 1e-2)]
    dt_cap: f64,

    /// Final time
    #[arg(long = "T", default_value_t = 1.0)]
    t_final: f64,

    /// Picard tolerance
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,

    #[arg(long = "max-picard", default_value_t = 50)]
    max_picard: usize,

    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    format: Format,

    /// Report path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = LinearArg::Condensed)]
    linear: LinearArg,

    /// Run meshes concurrently
    #[arg(long)]
    parallel: bool,

    /// key=value file with defaults for any of the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

/// A validated command line.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub law: ForchheimerLaw,
    pub meshes: Vec<usize>,
    pub dt: TimeStepPolicy,
    pub t_final: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub linear: LinearSolve,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub parallel: bool,
}

impl RunSpec {
    pub fn study_config(&self) -> StudyConfig {
        StudyConfig {
            t_final: self.t_final,
            dt: self.dt,
            picard_tol: self.picard_tol,
            picard_max: self.picard_max,
            linear: self.linear,
            parallel: self.parallel,
        }
    }
}

/// Parses `argv` (including the program name). Help and version requests
/// come back as `Err(Error::Usage)` carrying the rendered text.
pub fn parse_args<I, T>(argv: I) -> Result<RunSpec>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    parse(argv).map_err(|e| match e {
        ParseError::Clap(e) => Error::Usage(e.to_string()),
        ParseError::Other(e) => e,
    })
}

enum ParseError {
    Clap(clap::Error),
    Other(Error),
}

fn parse<I, T>(argv: I) -> std::result::Result<RunSpec, ParseError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = with_config_defaults(argv).map_err(ParseError::Other)?;
    let args = Args::try_parse_from(argv).map_err(ParseError::Clap)?;
    validate(args).map_err(ParseError::Other)
}

fn validate(args: Args) -> Result<RunSpec> {
    let law = ForchheimerLaw::from_str(&args.law).map_err(|e| Error::Usage(format!("--law: {e}")))?;
    if args.mesh.is_empty() || args.mesh.contains(&0) {
        return Err(Error::Usage("--mesh: sizes must be positive".into()));
    }
    if args.mesh.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("--mesh: sizes must be strictly increasing".into()));
    }
    if !(args.dt_cap > 0.0 && args.dt_cap.is_finite()) {
        return Err(Error::Usage(format!("--dt-cap must be positive, got {}", args.dt_cap)));
    }
    if !(args.t_final >= 0.0 && args.t_final.is_finite()) {
        return Err(Error::Usage(format!("--T must be nonnegative, got {}", args.t_final)));
    }
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(Error::Usage(format!("--tol must be positive, got {}", args.tol)));
    }
    if args.max_picard == 0 {
        return Err(Error::Usage("--max-picard must be at least 1".into()));
    }
    let dt = match args.dt {
        DtArg::Fixed(v) => TimeStepPolicy::Fixed(v),
        DtArg::MeshSquared => TimeStepPolicy::MeshSquared { cap: args.dt_cap },
    };
    Ok(RunSpec {
        law,
        meshes: args.mesh,
        dt,
        t_final: args.t_final,
        picard_tol: args.tol,
        picard_max: args.max_picard,
        linear: match args.linear {
            LinearArg::Condensed => LinearSolve::Condensed,
            LinearArg::Monolithic => LinearSolve::Monolithic,
        },
        format: args.format,
        out: args.out,
        parallel: args.parallel,
    })
}

/// Inserts `--key=value` pairs from a `--config` file right after the program
/// name, so flags given on the command line take precedence.
fn with_config_defaults(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut iter = argv.iter().skip(1);
    while let Some(arg) = iter.next() {
        let arg = arg.to_string_lossy();
        if arg == "--config" {
            path = iter.next().map(|p| PathBuf::from(p.clone()));
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let mut out: Vec<OsString> = argv.iter().take(1).cloned().collect();
    out.extend(read_config(&path)?);
    out.extend(argv.into_iter().skip(1));
    Ok(out)
}

fn read_config(path: &Path) -> Result<Vec<OsString>> {
    let text = fs::read_to_string(path)?;
    let mut args = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Usage(format!("{}:{}: expected key=value", path.display(), i + 1)));
        };
        let key = key.trim();
        if key == "config" {
            return Err(Error::Usage(format!("{}:{}: nested config", path.display(), i + 1)));
        }
        args.push(OsString::from(format!("--{key}={}", value.trim())));
    }
    Ok(args)
}

pub fn render(report: &ConvergenceReport, format: Format) -> String {
    match format {
        Format::Csv => report.to_csv(),
        Format::Markdown => report.to_markdown(),
    }
}

/// One-line description of the last rates in `report`.
pub fn summary(report: &ConvergenceReport) -> String {
    let rate = |r: Option<f64>| r.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
    let last = report.rows.last().expect("report has rows");
    let from = report.rows.len().checked_sub(2).map(|i| report.rows[i].n);
    let picard_max = report.rows.iter().map(|r| r.picard_max).max().unwrap_or(0);
    match from {
        Some(n) => format!(
            "final rates (n={n}->{}): p {}, s {}, u {}; max Picard iterations {picard_max}",
            last.n,
            rate(last.rate_p),
            rate(last.rate_s),
            rate(last.rate_u)
        ),
        None => format!(
            "n={}: err_p {:.3e}, err_s {:.3e}, err_u {:.3e}; max Picard iterations {picard_max}",
            last.n, last.errors.pressure, last.errors.gradient, last.errors.velocity
        ),
    }
}

/// Runs the study described by `spec`, writing the report to `spec.out` (or
/// `stdout`) and the summary to `stdout` (or `stderr` when the report goes
/// to `stdout`).
pub fn execute(spec: &RunSpec, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<ConvergenceReport> {
    // open the output first so an unwritable path fails before the solve
    let mut file = match &spec.out {
        Some(path) => Some(fs::File::create(path)?),
        None => None,
    };
    let exact = ManufacturedSolution::new(spec.law.clone());
    let report = convergence_study(&exact, &spec.meshes, &spec.study_config())?;
    let text = render(&report, spec.format);
    let line = summary(&report);
    match file.as_mut() {
        Some(f) => {
            f.write_all(text.as_bytes())?;
            f.flush()?;
            writeln!(stdout, "{line}")?;
        }
        None => {
            stdout.write_all(text.as_bytes())?;
            writeln!(stderr, "{line}")?;
        }
    }
    Ok(report)
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) => EXIT_USAGE,
        Error::Io(_) => EXIT_IO,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_FAILURE,
    }
}

/// Full command: parse, run, report. Returns the process exit code.
pub fn main_with_args<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let spec = match parse(argv) {
        Ok(spec) => spec,
        Err(ParseError::Clap(e)) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
        Err(ParseError::Other(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    match execute(&spec, stdout, stderr) {
        Ok(_) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
