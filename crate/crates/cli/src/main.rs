//! `lie`: integrate, check and superpose SL(2,R) Lie systems from the shell.
//!
//! Exit codes: 0 success (or integrable), 1 criterion rejected, 2 usage
//! error, 3 numeric or degenerate failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;
mod system;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use commands::{Method, Rule, RuleArgs};
use output::{Body, Output};
use system::{Initial, RunConfig, SystemInput, PRESETS};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "lie", version, about = "Riccati, oscillator and Pinney systems on SL(2,R)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, default_value_t = 1e-10)]
    rtol: f64,
    #[arg(long, global = true, default_value_t = 1e-12)]
    atol: f64,
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    t0: f64,
    #[arg(long, global = true, default_value_t = 10.0, allow_negative_numbers = true)]
    t1: f64,
    /// Number of output samples, including both ends.
    #[arg(short = 'n', long, global = true, default_value_t = 101)]
    samples: usize,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Draw initial values that are not given explicitly from this seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate a system and write its trajectory as CSV.
    Integrate {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_enum, default_value_t = Method::Numeric)]
        method: Method,
    },
    /// Test the scaling criterion for integrability.
    Check {
        #[command(flatten)]
        system: SystemArgs,
        /// Relative tolerance for the constancy of K(t).
        #[arg(long, default_value_t = liesys::numerics::DEFAULT_CONSTANCY_TOL)]
        tol: f64,
    },
    /// Rebuild a solution from seeds and compare it with direct integration.
    Superpose {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_enum)]
        rule: Rule,
        /// Initial values of the three cross-ratio seeds.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        seeds: Vec<f64>,
        /// Cross ratio (cross-ratio rule) or integral coefficient (partial rule).
        #[arg(long, allow_negative_numbers = true)]
        k: Option<f64>,
        /// Coefficient of the seed itself in the partial rule.
        #[arg(long, allow_negative_numbers = true)]
        kp: Option<f64>,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        k1: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        k2: f64,
    },
    /// List the presets with their parameters and output columns.
    Presets,
}

#[derive(Args, Debug, Clone)]
struct SystemArgs {
    #[arg(long)]
    preset: Option<String>,
    /// Read --b0/--b1/--b2 as a Riccati equation instead of an oscillator.
    #[arg(long)]
    riccati: bool,
    #[arg(long, allow_hyphen_values = true)]
    b0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b2: Option<String>,
    /// Preset parameter, repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE", allow_hyphen_values = true)]
    params: Vec<String>,
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    v0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    vy0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    z0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    vz0: Option<f64>,
    /// Run once per value of a parameter or initial value: NAME=FROM:TO:COUNT.
    #[arg(long, value_name = "NAME=FROM:TO:COUNT", allow_hyphen_values = true)]
    sweep: Option<String>,
}

impl SystemArgs {
    fn input(&self) -> Result<SystemInput, CliError> {
        let mut params = std::collections::BTreeMap::new();
        for p in &self.params {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--param expects NAME=VALUE, got `{p}`")))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(SystemInput {
            preset: self.preset.clone(),
            riccati: self.riccati,
            b: [self.b0.clone(), self.b1.clone(), self.b2.clone()],
            params,
            initial: Initial {
                x0: self.x0,
                v0: self.v0,
                y0: self.y0,
                vy0: self.vy0,
                z0: self.z0,
                vz0: self.vz0,
            },
        })
    }
}

struct Sweep {
    name: String,
    values: Vec<f64>,
}

fn parse_sweep(text: &str) -> Result<Sweep, CliError> {
    let bad = || CliError::Usage(format!("--sweep expects NAME=FROM:TO:COUNT, got `{text}`"));
    let (name, range) = text.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let (a, b): (f64, f64) = (
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    );
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    let values = if n == 1 { vec![a] } else { liesys::linspace(a, b, n) };
    Ok(Sweep {
        name: name.trim().to_string(),
        values,
    })
}

fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("LIE_NUM_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("LIE_NUM_THREADS must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Usage(e.to_string()))
}

type Job = Box<dyn Fn(&RunConfig) -> Result<Output, CliError> + Sync>;

fn run(cli: &Cli) -> Result<Output, CliError> {
    let (sys, job): (&SystemArgs, Job) = match &cli.command {
        Command::Presets => return Ok(presets()),
        Command::Integrate { system, method } => {
            let m = *method;
            (system, Box::new(move |c| commands::integrate(c, m)))
        }
        Command::Check { system, tol } => {
            let tol = *tol;
            (system, Box::new(move |c| commands::check(c, tol)))
        }
        Command::Superpose {
            system,
            rule,
            seeds,
            k,
            kp,
            k1,
            k2,
        } => {
            let rule = *rule;
            let args = RuleArgs {
                seeds: seeds.clone(),
                k: *k,
                kp: *kp,
                k1: *k1,
                k2: *k2,
            };
            (system, Box::new(move |c| commands::superpose(c, rule, &args)))
        }
    };
    if cli.samples < 2 {
        return Err(CliError::Usage("need at least 2 samples".into()));
    }
    if !(cli.t1 > cli.t0) {
        return Err(CliError::Usage(format!(
            "--t1 ({}) must exceed --t0 ({})",
            cli.t1, cli.t0
        )));
    }
    if !(cli.rtol > 0.0 && cli.atol > 0.0) {
        return Err(CliError::Usage("tolerances must be positive".into()));
    }
    let input = sys.input()?;
    let config = |input: &SystemInput| -> Result<RunConfig, CliError> {
        let (system, init) = input.resolve(cli.seed)?;
        Ok(RunConfig {
            system,
            init,
            t_span: (cli.t0, cli.t1),
            samples: cli.samples,
            rtol: cli.rtol,
            atol: cli.atol,
        })
    };
    let Some(sweep) = sys.sweep.as_deref().map(parse_sweep).transpose()? else {
        return job(&config(&input)?);
    };
    // build every configuration up front so usage errors surface before any work
    let configs = sweep
        .values
        .iter()
        .map(|&v| {
            let mut inp = input.clone();
            inp.set(&sweep.name, v)?;
            config(&inp)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<Result<Output, CliError>> = worker_pool()?.install(|| configs.par_iter().map(&job).collect());
    let mut runs = Vec::with_capacity(results.len());
    for (v, r) in sweep.values.iter().zip(results) {
        match r {
            Ok(o) => runs.push((*v, o)),
            Err(e) => return Err(annotate(e, &format!("{}={v}", sweep.name))),
        }
    }
    Ok(output::merge(&sweep.name, runs))
}

fn annotate(e: CliError, context: &str) -> CliError {
    match e {
        CliError::Usage(m) => CliError::Usage(format!("{context}: {m}")),
        CliError::Numeric(m) => CliError::Numeric(format!("{context}: {m}")),
    }
}

fn presets() -> Output {
    let mut lines = Vec::new();
    for p in PRESETS {
        let params: Vec<String> = p.params.iter().map(|(n, d)| format!("{n}={d}")).collect();
        lines.push(format!("{}: {}", p.name, p.summary));
        lines.push(format!("  params: {}", params.join(" ")));
        lines.push(format!("  columns: {}", p.columns));
    }
    Output {
        body: Body::Lines(lines),
        status: 0,
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    let written = match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    written.map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = run(&cli).and_then(|o| {
        emit(&o.render(), cli.out.as_ref())?;
        Ok(o.status)
    });
    match result {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("lie: {e}");
            ExitCode::from(e.code())
        }
    }
}
