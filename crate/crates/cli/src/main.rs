//! `bns`: simulate, estimate and analyse BNS stochastic volatility models.
//!
//! Exit codes: 0 success, 2 invalid input or I/O failure, 3 the estimating
//! equations have no solution for the given series.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bns_core::asymptotics::asymptotic_covariance;
use bns_core::config::RunConfig;
use bns_core::estimator::{estimate, EstimateStatus};
use bns_core::mc::{run_experiment, write_outputs, McExperimentConfig};
use bns_core::model::DEFAULT_MAX_ORDER;
use bns_core::simulate::{simulate, SimConfig, DEFAULT_SUBGRID};
use bns_core::{Error, ModelKind, ObservationSeries};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "bns", version, about = "BNS stochastic volatility toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one path and write it as CSV.
    Simulate(SimulateArgs),
    /// Estimate the six parameters from a CSV series.
    Estimate(EstimateArgs),
    /// Evaluate the asymptotic covariance of the estimator.
    Asymptotics(AsymptoticsArgs),
    /// Run a replicated simulate-and-estimate experiment.
    Mc(McArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// JSON parameter file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides the `model` key of the config.
    #[arg(long, value_name = "KIND")]
    model: Option<ModelKind>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of steps; falls back to `n` in the config.
    #[arg(long, value_name = "N")]
    length: Option<usize>,
    /// Output file, or directory to hold `series.csv`. Defaults to stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// CSV series with a `# delta_t=...,v0=...` line.
    input: PathBuf,
    /// Parametrization of the named view.
    #[arg(long, value_name = "KIND", default_value = "generic")]
    model: ModelKind,
}

#[derive(Args)]
struct AsymptoticsArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Also write `asymptotics.json` into this directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of replications; falls back to `m` in the config.
    #[arg(long, value_name = "M")]
    replications: Option<usize>,
    /// Observations per replication; falls back to `n` in the config.
    #[arg(long, value_name = "N")]
    length: Option<usize>,
    /// Histogram bins; falls back to `bins` in the config, then 40.
    #[arg(long, value_name = "K")]
    bins: Option<usize>,
    #[arg(long, value_name = "DIR", default_value = "mc_out")]
    out: PathBuf,
}

enum Failure {
    Input(String),
    Degenerate(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

/// `--seed`, then the config's `seed`, then `BNS_SEED`, then 0.
fn resolve_seed(flag: Option<u64>, cfg: &RunConfig) -> Result<u64, Failure> {
    if let Some(s) = flag.or(cfg.seed) {
        return Ok(s);
    }
    match std::env::var("BNS_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("BNS_SEED=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn required(
    flag: Option<usize>,
    config: Option<usize>,
    name: &str,
    key: &str,
) -> Result<usize, Failure> {
    flag.or(config)
        .ok_or_else(|| Failure::Input(format!("missing key `{key}` (or pass --{name})")))
}

fn load(args: &ModelArgs) -> Result<RunConfig, Failure> {
    Ok(RunConfig::from_file(&args.config, args.model)?)
}

fn write_stdout(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Input(format!("stdout: {e}")))
}

fn pretty(value: &impl serde::Serialize) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Input(format!("serializing output: {e}")))
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let cfg = load(&args.model)?;
    let n = required(args.length, cfg.n, "length", "n")?;
    let sim = SimConfig {
        model: cfg.model.clone(),
        n,
        seed: resolve_seed(args.seed, &cfg)?,
        subgrid: cfg.subgrid.unwrap_or(DEFAULT_SUBGRID),
    };
    let series = simulate(&sim)?;
    match args.out {
        None => write_stdout(&series.to_csv_string()?),
        Some(path) => {
            let path = if path.is_dir() {
                path.join("series.csv")
            } else {
                path
            };
            series.write_csv_file(&path)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Failure> {
    let series = ObservationSeries::read_csv_file(&args.input)?;
    let est = estimate(&series, args.model)?;
    let theta_hat = est.result.theta_hat.map(|p| {
        ModelKind::Generic
            .labels()
            .iter()
            .zip(p.theta())
            .map(|(l, v)| (l.to_string(), json!(v)))
            .collect::<Map<String, Value>>()
    });
    let named = est.named.map(|v| {
        v.into_iter()
            .map(|(l, x)| (l, json!(x)))
            .collect::<Map<String, Value>>()
    });
    let (status, reasons) = match &est.result.status {
        EstimateStatus::Ok => ("ok", Vec::new()),
        EstimateStatus::Degenerate(r) => ("degenerate", r.iter().map(|g| g.describe()).collect()),
    };
    let out = json!({
        "status": status,
        "reasons": reasons,
        "n": series.len(),
        "delta_t": series.delta_t(),
        "model": est.kind,
        "theta_hat": theta_hat,
        "named_params": named,
        "gate_diagnostics": est.result.diagnostics,
    });
    write_stdout(&pretty(&out)?)?;
    match est.result.status {
        EstimateStatus::Ok => Ok(()),
        EstimateStatus::Degenerate(_) => Err(Failure::Degenerate(reasons.join(", "))),
    }
}

fn cmd_asymptotics(args: AsymptoticsArgs) -> Result<(), Failure> {
    let cfg = load(&args.model)?;
    let spec = cfg.model.cumulants(DEFAULT_MAX_ORDER)?;
    let report = asymptotic_covariance(cfg.model.params(), &spec, cfg.model.kind())?;
    let text = pretty(&report)?;
    if let Some(dir) = args.out {
        std::fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
        let path = dir.join("asymptotics.json");
        std::fs::write(&path, &text).map_err(|e| io_failure(&path, e))?;
    }
    write_stdout(&text)
}

fn cmd_mc(args: McArgs) -> Result<(), Failure> {
    let cfg = load(&args.model)?;
    let mut mc = McExperimentConfig::new(
        cfg.model.clone(),
        required(args.length, cfg.n, "length", "n")?,
        required(args.replications, cfg.m, "replications", "m")?,
        resolve_seed(args.seed, &cfg)?,
    );
    if let Some(b) = args.bins.or(cfg.bins) {
        mc.bins = b;
    }
    if let Some(s) = cfg.subgrid {
        mc.subgrid = s;
    }
    let spec = cfg.model.cumulants(DEFAULT_MAX_ORDER)?;
    let asymptotic = asymptotic_covariance(cfg.model.params(), &spec, cfg.model.kind())?;
    let report = run_experiment(&mc, &asymptotic)?;
    write_outputs(&report, &args.out)?;
    eprintln!(
        "{} replications, {} gate failures, outputs in {}",
        report.m,
        report.gate_failures,
        args.out.display()
    );
    write_stdout(&pretty(&report)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Asymptotics(a) => cmd_asymptotics(a),
        Command::Mc(a) => cmd_mc(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Degenerate(msg)) => {
            eprintln!("degenerate: {msg}");
            ExitCode::from(3)
        }
    }
}
