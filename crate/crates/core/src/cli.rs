//! The `moreau` command line: grids, the envelope figure data, the property
//! suites and proximal-point minimization.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::conjugate::grid_point;
use crate::envelope::{envelope_report_with, proximal_point_minimize_with};
use crate::error::Error;
use crate::prox::{check_gamma, ProxOptions};
use crate::report::{csv_writer, format_extended, format_real};
use crate::suites::{run_all, run_suite, SuiteConfig, SUITE_NAMES};
use crate::zoo::{function_from_str, ZooEntry};

/// Default output directory when `--output` is not given.
pub const OUTPUT_DIR_ENV: &str = "MOREAU_OUTPUT_DIR";

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "moreau", version, about = "Proximal points and Moreau envelopes of weakly convex functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate f, the envelope, the prox and envelope derivatives; one CSV per gamma.
    Grid(GridArgs),
    /// Envelope curves of a function for several gammas in one CSV.
    Figure(FigureArgs),
    /// Run the seeded invariant suites and write a property report.
    Check(CheckArgs),
    /// Proximal point iterations from a starting point.
    Minimize(MinimizeArgs),
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Zoo member, e.g. `paper_h` or `quadratic(2)`.
    #[arg(long)]
    pub function: String,
    /// Envelope parameter; repeat or separate with commas.
    #[arg(long = "gamma", alias = "gammas", value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub gammas: Vec<f64>,
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub hi: f64,
    #[arg(long, default_value_t = 401)]
    pub samples: usize,
    /// Use the inner solver even when closed forms exist.
    #[arg(long)]
    pub numeric: bool,
    /// Output directory (default: $MOREAU_OUTPUT_DIR or the working directory).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long, default_value = "paper_h")]
    pub function: String,
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.25, 0.49])]
    pub gammas: Vec<f64>,
    #[arg(long, default_value_t = -1.6, allow_negative_numbers = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.6, allow_negative_numbers = true)]
    pub hi: f64,
    #[arg(long, default_value_t = 321)]
    pub samples: usize,
    #[arg(long)]
    pub numeric: bool,
    /// Output file, `-` for stdout (default: figure.csv in the output directory).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Limit for the numeric-versus-closed-form and Hamilton-Jacobi checks.
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    /// Run a single suite.
    #[arg(long)]
    pub suite: Option<String>,
    /// Report file, `-` for stdout (default: report.csv in the output directory).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    #[arg(long)]
    pub function: String,
    #[arg(long)]
    pub gamma: f64,
    /// Starting point; comma-separated coordinates.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub x0: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long)]
    pub numeric: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Library(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Library(e) if is_config_error(e) => EXIT_CONFIG,
            _ => EXIT_FAILURE,
        }
    }
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InadmissibleGamma { .. }
            | Error::UnknownFunction(_)
            | Error::InvalidParams(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidArgument(_)
            | Error::NonFinitePoint
    )
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses `args` (including the program name) and runs the command.
/// Messages go to `stderr`; CSV written to `-` goes to `stdout`.
pub fn run_from_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8, CliError> {
    match command {
        Command::Grid(args) => run_grid(args, stderr),
        Command::Figure(args) => run_figure(args, stdout, stderr),
        Command::Check(args) => run_check(args, stdout, stderr),
        Command::Minimize(args) => run_minimize(args, stdout, stderr),
    }
}

fn output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

fn open_output(path: &Path, stdout: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    if path == Path::new("-") {
        return body(stdout);
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let mut file = BufWriter::new(File::create(path)?);
    body(&mut file)?;
    file.flush()?;
    Ok(())
}

fn load_function(text: &str) -> Result<ZooEntry, CliError> {
    Ok(function_from_str(text)?)
}

fn validate_range(lo: f64, hi: f64, samples: usize) -> Result<(), CliError> {
    if samples < 2 {
        return Err(config(format!("--samples must be at least 2, got {samples}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(config(format!("invalid range [{lo}, {hi}]")));
    }
    Ok(())
}

fn validate_gammas(entry: &ZooEntry, gammas: &[f64]) -> Result<(), CliError> {
    if gammas.is_empty() {
        return Err(config("at least one gamma is required"));
    }
    for &gamma in gammas {
        check_gamma(entry.spec.rho(), gamma)?;
    }
    Ok(())
}

fn one_dimensional(entry: &ZooEntry) -> Result<(), CliError> {
    if entry.spec.dim() != 1 {
        return Err(config(format!("{} is {}-dimensional; grids need a 1-D function", entry.label(), entry.spec.dim())));
    }
    Ok(())
}

fn prox_options(numeric: bool) -> ProxOptions {
    if numeric {
        ProxOptions::numeric().with_tol(1e-12)
    } else {
        ProxOptions::default()
    }
}

/// File name of one grid CSV, e.g. `grid_paper_h_gamma_0.25.csv`.
pub fn grid_file_name(label: &str, gamma: f64) -> String {
    let safe: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-' { c } else { '_' })
        .collect();
    format!("grid_{}_gamma_{}.csv", safe.trim_end_matches('_'), format_real(gamma))
}

fn run_grid(args: &GridArgs, stderr: &mut dyn Write) -> Result<u8, CliError> {
    let entry = load_function(&args.function)?;
    one_dimensional(&entry)?;
    validate_range(args.lo, args.hi, args.samples)?;
    validate_gammas(&entry, &args.gammas)?;
    let dir = args.output.clone().unwrap_or_else(output_dir);
    let options = prox_options(args.numeric);
    let f = &entry.spec;
    for &gamma in &args.gammas {
        let path = dir.join(grid_file_name(&entry.label(), gamma));
        open_output(&path, &mut io::sink(), |out| {
            let mut w = csv_writer(out);
            w.write_record(["x", "f", "env", "prox", "grad_env", "dgamma"])?;
            for k in 0..args.samples {
                let x = grid_point(args.lo, args.hi, k, args.samples);
                let fx = f.evaluate(&[x])?;
                let r = envelope_report_with(f, gamma, &[x], &options)?;
                w.write_record([
                    format_real(x),
                    format_extended(fx),
                    format_real(r.value),
                    format_real(r.prox[0]),
                    format_real(r.gradient[0]),
                    format_real(r.dgamma),
                ])?;
            }
            w.flush()?;
            Ok(())
        })?;
        writeln!(stderr, "wrote {}", path.display())?;
    }
    Ok(EXIT_OK)
}

/// Column name of one envelope curve, e.g. `env_0.25`.
pub fn figure_column(gamma: f64) -> String {
    format!("env_{}", format_real(gamma))
}

fn run_figure(args: &FigureArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8, CliError> {
    let entry = load_function(&args.function)?;
    one_dimensional(&entry)?;
    validate_range(args.lo, args.hi, args.samples)?;
    validate_gammas(&entry, &args.gammas)?;
    let path = args.output.clone().unwrap_or_else(|| output_dir().join("figure.csv"));
    let options = prox_options(args.numeric);
    let f = &entry.spec;
    open_output(&path, stdout, |out| {
        let mut w = csv_writer(out);
        let mut header = vec!["x".to_string(), "h".to_string()];
        header.extend(args.gammas.iter().map(|&g| figure_column(g)));
        w.write_record(&header)?;
        for k in 0..args.samples {
            let x = grid_point(args.lo, args.hi, k, args.samples);
            let mut record = vec![format_real(x), format_extended(f.evaluate(&[x])?)];
            for &gamma in &args.gammas {
                record.push(format_real(crate::envelope::env_value_with(f, gamma, &[x], &options)?));
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    })?;
    if path != Path::new("-") {
        writeln!(stderr, "wrote {}", path.display())?;
    }
    Ok(EXIT_OK)
}

fn run_check(args: &CheckArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8, CliError> {
    if !(args.tolerance > 0.0 && args.tolerance.is_finite()) {
        return Err(config(format!("--tolerance must be positive, got {}", args.tolerance)));
    }
    let config_ = SuiteConfig { seed: args.seed, tolerance: args.tolerance };
    let report = match &args.suite {
        Some(name) => run_suite(name, &config_)
            .ok_or_else(|| config(format!("unknown suite `{name}`; expected one of {}", SUITE_NAMES.join(", "))))?,
        None => run_all(&config_),
    };
    let path = args.output.clone().unwrap_or_else(|| output_dir().join("report.csv"));
    open_output(&path, stdout, |out| Ok(report.write_csv(out)?))?;
    let failed: Vec<_> = report.failures().collect();
    for row in &failed {
        writeln!(
            stderr,
            "FAIL {}/{} [{}]: worst {} > limit {} {}",
            row.suite,
            row.check,
            row.function,
            format_real(row.worst),
            format_real(row.limit),
            row.detail
        )?;
    }
    writeln!(stderr, "{} checks, {} failed", report.rows.len(), failed.len())?;
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_FAILURE })
}

fn run_minimize(args: &MinimizeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8, CliError> {
    let entry = load_function(&args.function)?;
    validate_gammas(&entry, &[args.gamma])?;
    if args.x0.len() != entry.spec.dim() {
        return Err(config(format!("--x0 has {} coordinates, {} expects {}", args.x0.len(), entry.label(), entry.spec.dim())));
    }
    if !(args.tol >= 0.0) {
        return Err(config("--tol must be non-negative"));
    }
    let result = proximal_point_minimize_with(
        &entry.spec,
        args.gamma,
        &args.x0,
        args.tol,
        args.max_iter,
        &prox_options(args.numeric),
    )?;
    let mut w = csv_writer(&mut *stdout);
    let mut header = vec!["iteration".to_string()];
    if entry.spec.dim() == 1 {
        header.push("x".into());
    } else {
        header.extend((1..=entry.spec.dim()).map(|i| format!("x{i}")));
    }
    w.write_record(&header)?;
    for (k, x) in result.trace.iter().take(result.iterations + 1).enumerate() {
        let mut record = vec![k.to_string()];
        record.extend(x.iter().map(|v| format_real(*v)));
        w.write_record(&record)?;
    }
    w.flush()?;
    drop(w);
    let point: Vec<String> = result.point.iter().map(|v| format_real(*v)).collect();
    writeln!(
        stderr,
        "{} after {} iteration(s): x = [{}], |grad env| = {}",
        if result.converged { "converged" } else { "not converged" },
        result.iterations,
        point.join(", "),
        format_real(result.gradient_norm)
    )?;
    Ok(if result.converged { EXIT_OK } else { EXIT_FAILURE })
}
