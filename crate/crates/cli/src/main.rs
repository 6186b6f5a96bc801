mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{Config, ErrorObject, Report};

const DEFAULT_TOL: f64 = 1e-7;

#[derive(Debug, Parser)]
#[command(name = "symidx", version, about = "Symplectic indices, Hamiltonian orbits and GF(2) chain complexes")]
pub struct Cli {
    /// Relative tolerance for degeneracy tests (default 1e-7, or SYMIDX_TOL).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for every randomized choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Integration steps; overrides --dt where both apply.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Fourier cutoff of the truncated loop operator.
    #[arg(long = "fourier-cutoff", global = true, default_value_t = 32)]
    fourier_cutoff: usize,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Structured,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Indices of symplectic paths and symmetric families.
    #[command(subcommand)]
    Index(IndexCmd),
    /// First Chern number from clutching data.
    Chern(InputArg),
    /// Hamiltonian dynamics.
    #[command(subcommand, name = "dyn")]
    Dyn(DynCmd),
    /// GF(2) chain complexes.
    #[command(subcommand)]
    Chain(ChainCmd),
    /// Built-in worked examples.
    #[command(subcommand)]
    Demo(DemoCmd),
    /// Randomized index axiom suite.
    Axioms(AxiomsArgs),
}

#[derive(Debug, Args)]
pub struct InputArg {
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum IndexCmd {
    /// Maslov index of a loop.
    Maslov(InputArg),
    /// Conley-Zehnder index by crossing forms.
    Cz(InputArg),
    /// Robbin-Salamon index of a path with arbitrary endpoints.
    Rs(InputArg),
    /// Conley-Zehnder index of an Sp(2) path by the winding interval.
    Winding(InputArg),
    /// Spectral flow of a symmetric family.
    Sf(InputArg),
    /// Spectral flow of the loop operator along a symmetric homotopy.
    LoopSf(InputArg),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Midpoint,
    Gauss4,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub z0: Vec<f64>,
    #[arg(long = "t-end")]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, value_enum, default_value_t = Method::Midpoint)]
    pub method: Method,
    /// Include every k-th sample of the trajectory in the report.
    #[arg(long = "dump-every")]
    pub dump_every: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Initial guess, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub z0: Vec<f64>,
    #[arg(long = "period-guess")]
    pub period_guess: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, value_enum, default_value_t = Method::Gauss4)]
    pub method: Method,
}

#[derive(Debug, Args)]
pub struct TwistArgs {
    /// Perturbation of the map `(theta + r, r + epsilon sin 2 pi (theta + r))`.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub epsilon: f64,
    #[arg(long = "n-theta", default_value_t = 24)]
    pub n_theta: usize,
    #[arg(long = "n-r", default_value_t = 12)]
    pub n_r: usize,
}

#[derive(Debug, Subcommand)]
pub enum DynCmd {
    Integrate(IntegrateArgs),
    /// Periodic orbit by shooting.
    Orbit(OrbitArgs),
    /// Periodic orbit, monodromy and Conley-Zehnder index.
    Monodromy(OrbitArgs),
    /// Fixed points of a twist map of the annulus.
    Twist(TwistArgs),
}

#[derive(Debug, Subcommand)]
pub enum ChainCmd {
    /// Homology and cohomology of a complex.
    Homology(InputArg),
    /// Cascade complex of Morse-Bott data.
    Cascade(InputArg),
}

#[derive(Debug, Args)]
pub struct PendulumArgs {
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long = "t-end", default_value_t = 100.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
}

#[derive(Debug, Args)]
pub struct UnitSphereArgs {
    #[arg(long, default_value_t = 4)]
    pub n: u32,
    #[arg(long, default_value_t = 2)]
    pub window: u32,
}

#[derive(Debug, Subcommand)]
pub enum DemoCmd {
    /// Pendulum equilibria, energy drift and a libration orbit.
    Pendulum(PendulumArgs),
    /// Graded cascade homology of the unit cotangent bundle of S^n.
    UnitSphere(UnitSphereArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExecArg {
    Sequential,
    Parallel,
}

#[derive(Debug, Args)]
pub struct AxiomsArgs {
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = ExecArg::Parallel)]
    pub exec: ExecArg,
}

/// A failed invocation: the exit code and the error object.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: ErrorObject,
}

impl Failure {
    pub fn usage(name: &str, message: impl Into<String>) -> Self {
        Self {
            code: 2,
            error: ErrorObject {
                name: name.into(),
                message: message.into(),
            },
        }
    }
}

impl From<symidx::SymError> for Failure {
    fn from(e: symidx::SymError) -> Self {
        let code = if matches!(e, symidx::SymError::Parse(_)) { 2 } else { 1 };
        Self {
            code,
            error: ErrorObject {
                name: e.name().into(),
                message: e.to_string(),
            },
        }
    }
}

fn resolve_tol(flag: Option<f64>) -> Result<f64, Failure> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var("SYMIDX_TOL") {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage("usage", format!("SYMIDX_TOL is not a number: {s:?}")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Failure::usage("usage", "tolerance must be positive"));
    }
    Ok(tol)
}

fn emit(cli: &Cli, report: &Report) -> Result<(), Failure> {
    let text = match cli.format {
        Format::Structured => report.structured(),
        Format::Human => report.human(),
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::usage("io", format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn error_line(e: &ErrorObject) {
    let obj = serde_json::json!({ "error": e });
    eprintln!("{obj}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let tol = match resolve_tol(cli.tol) {
        Ok(t) => t,
        Err(f) => {
            error_line(&f.error);
            return ExitCode::from(f.code);
        }
    };
    let config = Config {
        tol,
        seed: cli.seed,
        steps: cli.steps,
        fourier_cutoff: cli.fourier_cutoff,
    };
    let mut outcome = commands::run(&cli.command, &config);
    let mut report = Report {
        tool: "symidx",
        version: env!("CARGO_PKG_VERSION"),
        command: commands::name(&cli.command),
        inputs: std::mem::take(&mut outcome.inputs),
        config,
        status: "ok",
        result: outcome.result.take(),
        diagnostics: std::mem::take(&mut outcome.diagnostics),
        error: None,
    };
    let mut code = 0;
    if let Some(f) = outcome.failure {
        code = f.code;
        report.status = "error";
        error_line(&f.error);
        report.error = Some(f.error);
    }
    if let Err(f) = emit(&cli, &report) {
        error_line(&f.error);
        return ExitCode::from(f.code);
    }
    ExitCode::from(code)
}
