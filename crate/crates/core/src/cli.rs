//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration or model
//! error, 3 integration failure, 4 the forward curve is not an extremal.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{LoadedConfig, ModelConfig};
use crate::dynamics::{
    integrate, integrate_pontryagin, verify_stationarity, IntegratorConfig, Method, Sampling, Trajectory,
    DEFAULT_ABS_TOL, DEFAULT_REL_TOL, EXTREMAL_TOLERANCE,
};
use crate::expr::parse_expression;
use crate::models::{Model, BUILTIN_NAMES};
use crate::point::ExtendedPoint;
use crate::report::RunReport;
use crate::suite::{run_suite, Suite, SuiteOptions};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INTEGRATION: i32 = 3;
pub const EXIT_NOT_EXTREMAL: i32 = 4;

/// Environment variable overriding the structural tolerance.
pub const TOLERANCE_ENV: &str = "QCONTACT_TOL";

#[derive(Debug, Parser)]
#[command(
    name = "qcontact",
    version,
    about = "Simulate and verify q-contact Hamiltonian and Lagrangian systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a model and write its trajectory as CSV.
    Simulate(SimulateArgs),
    /// Run verification suites and write a JSON report.
    Verify(VerifyArgs),
    /// Integrate an extremal forward and the adjoints backward.
    Pontryagin(PontryaginArgs),
    /// Parse an expression and print its syntax tree.
    Parse(ParseArgs),
    /// List the built-in models.
    Models,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ModelSource {
    /// Built-in model name, e.g. `e1`, `rocket`, `e1(3; 0.1, 0.2, 0.3)`.
    #[arg(long)]
    pub builtin: Option<String>,
    /// JSON model configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rk4,
    Rk45,
}

#[derive(Debug, Args)]
pub struct IntegrationArgs {
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long, value_enum, default_value = "rk45")]
    pub method: MethodArg,
    /// Absolute and relative tolerance for rk45.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Fixed step for rk4.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Output spacing; by default every accepted step is written.
    #[arg(long)]
    pub sample_interval: Option<f64>,
    /// Initial state as comma-separated coordinates `q..,v..,z..`.
    #[arg(long, allow_hyphen_values = true)]
    pub initial: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: ModelSource,
    #[command(flatten)]
    pub integration: IntegrationArgs,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Print the wall time to standard error.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: ModelSource,
    #[arg(long, default_value = "all", value_parser = ["structure", "dynamics", "noether", "pontryagin", "all"])]
    pub suite: String,
    /// Random sample points in addition to the initial state.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Structural tolerance; overrides the environment and the config file.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Include the wall time in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct PontryaginArgs {
    #[command(flatten)]
    pub source: ModelSource,
    #[command(flatten)]
    pub integration: IntegrationArgs,
    /// CSV output; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Stationarity report as JSON; standard error when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[arg(allow_hyphen_values = true)]
    pub expression: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::Pontryagin(a) => pontryagin(a),
        Command::Parse(a) => parse(a),
        Command::Models => {
            for name in BUILTIN_NAMES {
                println!("{name}");
            }
            EXIT_OK
        }
    }
}

fn fail(code: i32, err: impl std::fmt::Display) -> i32 {
    eprintln!("error: {err}");
    code
}

/// Exit code for an error raised while integrating.
fn integration_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_) | Error::Config { .. } => EXIT_CONFIG,
        Error::NotAnExtremal { .. } => EXIT_NOT_EXTREMAL,
        _ => EXIT_INTEGRATION,
    }
}

fn load(source: &ModelSource) -> crate::Result<LoadedConfig> {
    match (&source.builtin, &source.config) {
        (Some(name), _) => {
            let config = ModelConfig::builtin(name);
            let text = config.to_json();
            Ok(LoadedConfig {
                config,
                origin: "--builtin".into(),
                text,
            })
        }
        (None, Some(path)) => ModelConfig::load(path),
        (None, None) => unreachable!("clap requires a model source"),
    }
}

fn prepare(source: &ModelSource, args: Option<&IntegrationArgs>) -> crate::Result<(LoadedConfig, Model)> {
    let loaded = load(source)?;
    let mut model = loaded.build()?;
    if let Some(a) = args {
        if let Some(init) = &a.initial {
            let values = init
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Error::Config {
                    location: "--initial".into(),
                    message: e.to_string(),
                })?;
            model.dims().check_len(values.len()).map_err(|e| Error::Config {
                location: "--initial".into(),
                message: e.to_string(),
            })?;
            model.initial = values;
        }
    }
    Ok((loaded, model))
}

fn integrator(model: &Model, a: &IntegrationArgs) -> crate::Result<IntegratorConfig> {
    let t0 = a.t0.unwrap_or(model.t_span.0);
    let t1 = a.t1.unwrap_or(model.t_span.1);
    let method = match a.method {
        MethodArg::Rk4 => Method::Rk4 { step: a.step },
        MethodArg::Rk45 => match a.tol {
            Some(tol) => Method::rk45(tol, tol),
            None => Method::rk45(DEFAULT_ABS_TOL, DEFAULT_REL_TOL),
        },
    };
    let mut config = IntegratorConfig::new(method, t0, t1);
    if let Some(dt) = a.sample_interval {
        config = config.with_sampling(Sampling::Interval(dt));
    }
    config.validate()?;
    Ok(config)
}

fn write_output(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn forward(model: &Model, config: &IntegratorConfig) -> crate::Result<Trajectory> {
    let field = model.vector_field()?;
    let initial = ExtendedPoint::new(model.dims(), model.initial.clone())?;
    let mut traj = integrate(field.as_ref(), &initial, config)?;
    traj.meta.model = model.name.clone();
    Ok(traj)
}

fn simulate(a: SimulateArgs) -> i32 {
    let start = Instant::now();
    let (model, config) = match prepare(&a.source, Some(&a.integration))
        .and_then(|(_, m)| integrator(&m, &a.integration).map(|c| (m, c)))
    {
        Ok(v) => v,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let traj = match forward(&model, &config) {
        Ok(t) => t,
        Err(e) => return fail(integration_code(&e), e),
    };
    let energy = match model.lagrangian() {
        Some(l) => match traj
            .states
            .iter()
            .map(|x| l.energy(x))
            .collect::<crate::Result<Vec<_>>>()
        {
            Ok(e) => Some(e),
            Err(e) => return fail(EXIT_INTEGRATION, e),
        },
        None => None,
    };
    if let Err(e) = write_output(a.output.as_deref(), &traj.to_csv(energy.as_deref())) {
        return fail(EXIT_CONFIG, e);
    }
    if a.timing {
        eprintln!(
            "{}: {} samples, {} steps, {:.3} s",
            model.name,
            traj.len(),
            traj.meta.stats.accepted,
            start.elapsed().as_secs_f64()
        );
    }
    EXIT_OK
}

/// The structural tolerance from the flag, else from the environment.
fn tolerance_override(flag: Option<f64>) -> Result<Option<f64>, Error> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(TOLERANCE_ENV) {
        Ok(v) => v.trim().parse::<f64>().map(Some).map_err(|e| Error::Config {
            location: TOLERANCE_ENV.into(),
            message: e.to_string(),
        }),
        Err(_) => Ok(None),
    }
}

fn verify(a: VerifyArgs) -> i32 {
    let start = Instant::now();
    let (loaded, model) = match prepare(&a.source, None) {
        Ok(v) => v,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let tolerance = match tolerance_override(a.tol) {
        Ok(Some(t)) if !(t > 0.0) => return fail(EXIT_CONFIG, "tolerance must be positive"),
        Ok(t) => t,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let suite: Suite = a.suite.parse().expect("clap restricts suite names");
    let opts = SuiteOptions {
        points: a.points,
        seed: a.seed,
        tolerance,
        ..SuiteOptions::default()
    };
    let checks = run_suite(&model, suite, &opts);
    let mut report = RunReport::new(model.name.clone(), loaded.digest(), checks);
    if a.timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    let mut json = report.to_json();
    json.push('\n');
    if let Err(e) = write_output(a.output.as_deref(), &json) {
        return fail(EXIT_CONFIG, e);
    }
    for c in report.failures() {
        eprintln!(
            "FAIL {}: residual {:e} > tolerance {:e}{}",
            c.name,
            c.max_residual,
            c.tolerance,
            c.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
        );
    }
    if report.pass {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}

fn pontryagin(a: PontryaginArgs) -> i32 {
    let (model, config) = match prepare(&a.source, Some(&a.integration))
        .and_then(|(_, m)| integrator(&m, &a.integration).map(|c| (m, c)))
    {
        Ok(v) => v,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let Some(l) = model.lagrangian().cloned() else {
        return fail(EXIT_CONFIG, format!("{} is not a Lagrangian model", model.name));
    };
    // the Herglotz check needs resolved samples
    let config = match config.sampling {
        Sampling::Stride(_) => config.with_sampling(Sampling::Interval(0.01)),
        _ => config,
    };
    let run = match forward(&model, &config).and_then(|t| integrate_pontryagin(&l, &t, config.method)) {
        Ok(r) => r,
        Err(e) => return fail(integration_code(&e), e),
    };
    let stationarity = match verify_stationarity(&run, &l, EXTREMAL_TOLERANCE) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_INTEGRATION, e),
    };
    if let Err(e) = write_output(a.output.as_deref(), &run.to_csv()) {
        return fail(EXIT_CONFIG, e);
    }
    let mut json = serde_json::to_string_pretty(&stationarity).expect("report serializes");
    json.push('\n');
    match &a.report {
        Some(p) => {
            if let Err(e) = std::fs::write(p, json) {
                return fail(EXIT_CONFIG, e);
            }
        }
        None => eprint!("{json}"),
    }
    eprintln!("M({}) = {:.10e}", run.forward.times[0], run.m[0]);
    if stationarity.pass() {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}

fn parse(a: ParseArgs) -> i32 {
    match parse_expression(&a.expression) {
        Ok(ast) => {
            println!("{ast}");
            println!("{ast:#?}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{}", a.expression);
            eprintln!("{}^", " ".repeat(e.position()));
            fail(EXIT_CONFIG, e)
        }
    }
}
