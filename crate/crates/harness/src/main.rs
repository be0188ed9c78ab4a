use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dbs_core::HessianMode;
use dbs_harness::config::parse_mode;
use dbs_harness::study::parse_list;
use dbs_harness::{
    convergence_study, emit_csv, load_config, run_experiment, HarnessError, Quantile, Result, RunConfig, StudyGrid,
};

/// Deep backward scheme experiments.
///
/// Exit codes: 0 success, 2 usage, 3 configuration, 4 I/O, 5 numerical
/// failure (including partially failed experiments). The worker count for
/// parallel runs is read from DBS_WORKERS.
#[derive(Parser)]
#[command(name = "dbs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its per-run report.
    Solve(SolveArgs),
    /// Run a grid of experiments from a configuration file.
    Study(StudyArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    problem: String,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    maturity: Option<f64>,
    #[arg(long = "sigma-hat")]
    sigma_hat: Option<f64>,
    /// Truncation quantile in (0, 1), or `none`.
    #[arg(long)]
    quantile: Option<Quantile>,
    #[arg(long)]
    neurons: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long, value_parser = parse_mode, default_value = "explicit")]
    mode: HessianMode,
    #[arg(long, default_value_t = dbs_harness::config::DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = dbs_harness::config::DEFAULT_SCALE)]
    scale: f64,
    /// Problem parameter override, `name=value`; repeatable.
    #[arg(long = "param", value_parser = parse_override)]
    params: Vec<(String, f64)>,
    /// Report CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Training-log CSV.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated step counts.
    #[arg(long = "grid-N", value_parser = list::<usize>)]
    grid_n: Option<List<usize>>,
    /// Comma-separated training diffusion scales.
    #[arg(long = "grid-sigma", value_parser = list::<f64>)]
    grid_sigma: Option<List<f64>>,
    /// Comma-separated quantiles (`none` allowed).
    #[arg(long = "grid-p", value_parser = list::<Quantile>)]
    grid_p: Option<List<Quantile>>,
    /// Comma-separated widths.
    #[arg(long = "grid-m", value_parser = list::<usize>)]
    grid_m: Option<List<usize>>,
    /// Study CSV; defaults to `out` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Comma-separated CLI list, kept as one argument value.
#[derive(Clone)]
struct List<T>(Vec<T>);

fn list<T: std::str::FromStr>(s: &str) -> Result<List<T>, String> {
    parse_list(s).map(List)
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, found `{s}`"))?;
    let v = v.trim().parse().map_err(|_| format!("invalid value `{v}`"))?;
    Ok((k.trim().to_string(), v))
}

fn solve(a: SolveArgs) -> Result<()> {
    let cfg = RunConfig {
        problem: a.problem,
        overrides: a.params,
        dim: a.dim,
        maturity: a.maturity,
        steps: a.steps,
        sigma_hat: a.sigma_hat,
        quantile: a.quantile.unwrap_or_default(),
        width: a.neurons,
        hidden_layers: a.layers,
        mode: a.mode,
        runs: a.runs,
        seed: a.seed,
        scale: a.scale,
        out: a.out,
    };
    let report = run_experiment(&cfg)?;
    println!("{}", report.summary());
    if let Some(path) = &cfg.out {
        emit_csv(&report.to_table(), path)?;
    }
    if let Some(path) = &a.log {
        emit_csv(&report.log_table(), path)?;
    }
    report.ensure_complete()
}

fn study(a: StudyArgs) -> Result<()> {
    let base = load_config(&a.config)?;
    let grid = StudyGrid {
        steps: a.grid_n.map_or_else(|| vec![base.steps], |l| l.0),
        sigma_hat: a.grid_sigma.map(|l| l.0).unwrap_or_default(),
        quantiles: a.grid_p.map(|l| l.0).unwrap_or_default(),
        widths: a.grid_m.map(|l| l.0).unwrap_or_default(),
    };
    let out = a
        .out
        .or_else(|| base.out.clone())
        .ok_or_else(|| HarnessError::Invalid("no output path: pass --out or set `out`".into()))?;
    let table = convergence_study(&base, &grid)?;
    for r in &table.reports {
        println!("{}", r.summary());
    }
    emit_csv(&table.to_table(), &out)?;
    for r in &table.reports {
        r.ensure_complete()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Study(a) => study(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let category = e.category();
            eprintln!("error[{}]: {e}", category.name());
            ExitCode::from(category.exit_code() as u8)
        }
    }
}
