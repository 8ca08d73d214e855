//! `ptstokes`: command-line access to eigenvalues, Stokes multipliers,
//! pseudo-norms and exceptional points of `H = p^2 + V(q)`.
//!
//! Data goes to stdout (or `--out`), diagnostics to stderr. Exit codes:
//! 0 success, 2 usage error, 3 numerical failure, 4 verification or
//! completeness failure.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_coeffs, OutputFormat, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Verification(_) => EXIT_VERIFY,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Verification(m) => write!(f, "verification failure: {m}"),
        }
    }
}

impl From<pt_stokes::Error> for CliError {
    fn from(e: pt_stokes::Error) -> Self {
        if e.is_numerical() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ptstokes", version, about = "Spectra, Stokes multipliers and pseudo-norms of PT-symmetric polynomial potentials")]
pub struct Cli {
    /// Worker threads for batch evaluations (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON run configuration; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues in a real window, certified by zero counting.
    Spectrum(ProblemArgs),
    /// Table of C(E) and C'(E) on an equispaced real grid.
    StokesScan(ScanArgs),
    /// Pseudo-norm signs and the Gram table of the eigenfunctions.
    PseudoNorms(ProblemArgs),
    /// Coalescence of the two lowest levels of the cubic family.
    Exceptional(ExceptionalArgs),
    /// Invariant suite with a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Degree of the potential.
    #[arg(long)]
    pub m: Option<usize>,
    /// Lower coefficients a1,...,a_{m-1} (default all zero).
    #[arg(long, value_parser = coeff_list, allow_hyphen_values = true)]
    pub coeffs: Option<CoeffList>,
    #[arg(long, allow_hyphen_values = true)]
    pub emin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub emax: Option<f64>,
    /// Newton-step tolerance for eigenvalues.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Integrator relative tolerance.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Fixed initialization radius for every ray.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Number of grid points.
    #[arg(long, default_value_t = 201)]
    pub n: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ExceptionalArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub seed_alpha: Option<f64>,
    /// Defaults to the midpoint of the two lowest levels at the seed parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub seed_e: Option<f64>,
    /// Emit the eigenvalue flow over the parameter range instead.
    #[arg(long)]
    pub flow: bool,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub flow_from: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -3.0)]
    pub flow_to: f64,
    #[arg(long, default_value_t = 12)]
    pub flow_steps: usize,
    /// Upper end of the window seeding the flow.
    #[arg(long, default_value_t = 5.0)]
    pub flow_emax: f64,
    #[command(flatten)]
    pub problem: ProblemArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Level::Quick)]
    pub level: Level,
    /// Multiplies every tolerance; test hook.
    #[arg(long, hide = true, default_value_t = 1.0)]
    pub tolerance_scale: f64,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A parsed `a1,a2,...` list; one flag value, not repeated flags.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffList(pub Vec<f64>);

fn coeff_list(s: &str) -> Result<CoeffList, String> {
    parse_coeffs(s).map(CoeffList)
}

impl ProblemArgs {
    pub fn as_config(&self) -> RunConfig {
        RunConfig {
            m: self.m,
            coeffs: self.coeffs.clone().map(|c| c.0),
            emin: self.emin,
            emax: self.emax,
            tol: self.tol,
            rel_tol: self.rel_tol,
            radius: self.radius,
            format: self.format,
            out: self.out.clone(),
            threads: None,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match run(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "ptstokes: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let threads = cli.threads.or(file.threads);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    // Output is buffered so the command can run on the pool's workers.
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let result = pool.install(|| {
        let (out, err) = (&mut o as &mut dyn Write, &mut e as &mut dyn Write);
        match &cli.command {
            Command::Spectrum(a) => commands::spectrum(&file.merged(&a.as_config()), out, err),
            Command::StokesScan(a) => commands::stokes_scan(&file.merged(&a.problem.as_config()), a.n, out, err),
            Command::PseudoNorms(a) => commands::pseudo_norms(&file.merged(&a.as_config()), out, err),
            Command::Exceptional(a) => commands::exceptional(&file.merged(&a.problem.as_config()), a, out, err),
            Command::Verify(a) => {
                let flags = RunConfig { format: a.format, out: a.out.clone(), ..Default::default() };
                verify::run(&file.merged(&flags), a, out, err)
            }
        }
    });
    let _ = err.write_all(&e);
    out.write_all(&o).map_err(|x| CliError::Usage(format!("cannot write output: {x}")))?;
    result
}
