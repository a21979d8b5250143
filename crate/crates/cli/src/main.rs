use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;
use tsn::{
    emit_replicates, emit_table, emit_timing, fit, parametric_bootstrap, run_scenario, summarize, timing_study,
    FitConfig, FitResult, GridSpec, Method, MleOptions, RngStream, TableFormat, TruncationWindow,
};

mod data;
mod scenario;

use data::{parse_bound, prepare, read_column, ColumnSelector, Prepared};

#[derive(Parser)]
#[command(name = "tsn", version, about = "Fit and simulate truncated skew-normal models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to one column of a CSV file.
    Fit(FitArgs),
    /// Run the scenarios of a TOML file and write CSV tables.
    Simulate(SimulateArgs),
    /// Fit, then estimate standard errors by parametric bootstrap.
    Bootstrap {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long = "bootstrap-B", default_value_t = tsn::DEFAULT_REPLICATES)]
        bootstrap_b: usize,
    },
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    /// Header name or zero-based index; default is the first numeric column.
    #[arg(long)]
    column: Option<String>,
    #[arg(long, default_value = "-inf", value_parser = parse_bound, allow_hyphen_values = true)]
    lower: f64,
    #[arg(long, default_value = "inf", value_parser = parse_bound, allow_hyphen_values = true)]
    upper: f64,
    #[arg(long, default_value = "grid-mom")]
    method: Method,
    #[arg(long = "grid-a", default_value_t = 5.0)]
    grid_a: f64,
    #[arg(long = "grid-points", default_value_t = 401)]
    grid_points: usize,
    #[arg(long, default_value_t = 1)]
    multistart: usize,
    /// Fit √x; --lower/--upper stay in the original units.
    #[arg(long = "sqrt-transform")]
    sqrt_transform: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
    /// Replace every scenario's replication count.
    #[arg(long)]
    reps: Option<usize>,
    /// Replace every scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
}

/// A failure that maps to exit code 1.
struct InputError(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Simulate(args) => cmd_simulate(&args).map(|()| true),
        Command::Bootstrap { fit, bootstrap_b } => cmd_bootstrap(&fit, bootstrap_b),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

impl FitArgs {
    fn config(&self) -> Result<FitConfig> {
        Ok(FitConfig {
            grid: GridSpec::new(self.grid_a, self.grid_points)?,
            mle: MleOptions { multistart_count: self.multistart, seed: self.seed },
        })
    }

    fn load(&self) -> Result<Prepared> {
        let values = read_column(&self.input, &ColumnSelector::parse(self.column.as_deref()))?;
        prepare(values, self.lower, self.upper, self.sqrt_transform)
    }
}

fn bound(v: f64) -> Value {
    if v == f64::INFINITY {
        Value::from("inf")
    } else if v == f64::NEG_INFINITY {
        Value::from("-inf")
    } else {
        Value::from(v)
    }
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else {
        Value::Null
    }
}

#[derive(Serialize)]
struct Triple {
    xi: f64,
    omega: f64,
    alpha: f64,
}

#[derive(Serialize)]
struct WindowJson {
    lower: Value,
    upper: Value,
}

impl From<&TruncationWindow> for WindowJson {
    fn from(w: &TruncationWindow) -> Self {
        WindowJson { lower: bound(w.lower()), upper: bound(w.upper()) }
    }
}

#[derive(Serialize)]
struct GridJson {
    a: f64,
    points: usize,
}

#[derive(Serialize)]
struct FitJson {
    method: Method,
    estimate: Triple,
    loglik: Value,
    converged: bool,
    n_used: usize,
    /// Window in the units that were fitted.
    window: WindowJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual_norm: Option<f64>,
    transform: &'static str,
}

impl FitJson {
    fn new(args: &FitArgs, prepared: &Prepared, result: &FitResult, config: &FitConfig) -> Self {
        let e = result.estimate;
        FitJson {
            method: result.method,
            estimate: Triple { xi: e.xi, omega: e.omega, alpha: e.alpha },
            loglik: finite_or_null(result.loglik),
            converged: result.converged,
            n_used: prepared.data.len(),
            window: (&prepared.window).into(),
            grid: result
                .method
                .is_grid()
                .then(|| GridJson { a: config.grid.half_width(), points: config.grid.points() }),
            residual_norm: result.residual_norm,
            transform: if args.sqrt_transform { "sqrt" } else { "none" },
        }
    }
}

fn print_json(v: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> Result<bool, InputError> {
    let config = args.config()?;
    let prepared = args.load()?;
    let result = fit(args.method, &prepared.data, &prepared.window, &config)?;
    print_json(&FitJson::new(args, &prepared, &result, &config))?;
    if !result.converged {
        eprintln!("warning: {} did not converge", result.method);
    }
    Ok(result.converged)
}

#[derive(Serialize)]
struct BootstrapJson {
    #[serde(flatten)]
    fit: FitJson,
    se: Triple,
    #[serde(rename = "B")]
    b: usize,
    failures: usize,
    seed: u64,
}

fn cmd_bootstrap(args: &FitArgs, b: usize) -> Result<bool, InputError> {
    if b < 2 {
        return Err(anyhow!("--bootstrap-B must be at least 2, got {b}").into());
    }
    let config = args.config()?;
    let prepared = args.load()?;
    let result = fit(args.method, &prepared.data, &prepared.window, &config)?;
    if !result.converged {
        print_json(&FitJson::new(args, &prepared, &result, &config))?;
        eprintln!("warning: {} did not converge; bootstrap skipped", result.method);
        return Ok(false);
    }
    let n = prepared.data.len();
    let summary =
        parametric_bootstrap(&result, &prepared.window, n, b, args.method, &config, RngStream::new(args.seed, 0))?;
    print_json(&BootstrapJson {
        fit: FitJson::new(args, &prepared, &result, &config),
        se: Triple { xi: summary.se[0], omega: summary.se[1], alpha: summary.se[2] },
        b,
        failures: summary.failures,
        seed: args.seed,
    })?;
    Ok(true)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), InputError> {
    let text = std::fs::read_to_string(&args.input).with_context(|| format!("cannot read {}", args.input.display()))?;
    let mut file = scenario::parse(&text)?;
    if args.reps == Some(0) {
        return Err(anyhow!("--reps must be at least 1").into());
    }
    for s in &mut file.scenarios {
        if let Some(r) = args.reps {
            s.replications = r;
        }
        if let Some(seed) = args.seed {
            s.base_seed = seed;
        }
    }
    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("cannot create {}", args.out_dir.display()))?;

    let mut combined = String::new();
    for spec in &file.scenarios {
        let result = run_scenario(spec)?;
        let mut rows = Vec::new();
        for (method, reps) in &result.estimates {
            rows.extend(summarize(*method, reps, &spec.truth)?);
        }
        let csv = emit_table(&rows, TableFormat::Csv);
        write(&args.out_dir.join(format!("{}.csv", spec.name)), &csv)?;
        write(&args.out_dir.join(format!("{}_replicates.csv", spec.name)), &emit_replicates(&result))?;
        if combined.is_empty() {
            combined = format!("scenario,{}", csv.lines().next().unwrap_or_default());
            combined.push('\n');
        }
        for line in csv.lines().skip(1) {
            combined.push_str(&format!("{},{line}\n", spec.name));
        }
        println!("{} ({} {} tau={} alpha0={})", spec.name, spec.n, spec.direction, spec.tau, spec.truth.alpha);
        print!("{}", emit_table(&rows, TableFormat::Text));
    }
    if !file.scenarios.is_empty() {
        write(&args.out_dir.join("summary.csv"), &combined)?;
    }
    if let Some(t) = &file.timing {
        let rows = timing_study(&t.n_values, &t.grid_sizes, t.repeats, t.seed)?;
        write(&args.out_dir.join("timing.csv"), &emit_timing(&rows))?;
    }
    Ok(())
}
