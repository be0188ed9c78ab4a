//! Repeated independent runs of the backward scheme and their statistics.

use std::time::Instant;

use dbs_core::rng::run_seed;
use dbs_core::scheme::LogRow;
use dbs_core::{build_problem, solve_backward, Clamps, Problem, TimeGrid};
use rayon::prelude::*;

use crate::config::{mode_name, RunConfig};
use crate::error::{HarnessError, Result};
use crate::table::{Cell, Table};

/// Environment variable holding the worker count for parallel runs.
pub const WORKERS_VAR: &str = "DBS_WORKERS";

/// Estimates at `(0, x₀)` of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub u: f64,
    pub z: Vec<f64>,
    pub gamma00: f64,
    pub control: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub index: usize,
    pub seed: u64,
    /// `None` when the run failed; see `failure`.
    pub estimate: Option<Estimate>,
    pub failure: Option<String>,
    pub runtime_s: f64,
    pub clamps: u64,
    pub log: Vec<LogRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
}

impl Stats {
    /// `NaN` statistics for an empty sample.
    pub fn of(values: &[f64]) -> Stats {
        let n = values.len();
        if n == 0 {
            return Stats {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n == 1 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Stats { mean, std }
    }
}

/// Aggregates over the successful runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub successes: usize,
    pub u: Stats,
    pub z: Vec<Stats>,
    pub gamma00: Stats,
    pub control: Option<Vec<Stats>>,
    pub runtime_s: Stats,
    pub clamps: Stats,
}

/// `|mean − ref| / |ref|`.
pub fn relative_error(mean: f64, reference: f64) -> f64 {
    (mean - reference).abs() / reference.abs()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: RunConfig,
    pub dim: usize,
    pub x0: Vec<f64>,
    pub runs: Vec<RunRecord>,
    pub aggregate: Aggregate,
    /// Oracle values at `(0, x₀)` when the problem has one.
    pub reference: Option<Estimate>,
}

impl RunReport {
    pub fn failures(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(|r| r.failure.is_some())
    }

    pub fn rel_err_u(&self) -> Option<f64> {
        self.reference
            .as_ref()
            .map(|r| relative_error(self.aggregate.u.mean, r.u))
    }

    pub fn rel_err_z(&self, j: usize) -> Option<f64> {
        self.reference
            .as_ref()
            .map(|r| relative_error(self.aggregate.z[j].mean, r.z[j]))
    }

    pub fn rel_err_control(&self, k: usize) -> Option<f64> {
        let reference = self.reference.as_ref()?.control.as_ref()?;
        let mean = self.aggregate.control.as_ref()?;
        Some(relative_error(mean[k].mean, reference[k]))
    }

    /// Fails with the first recorded failure when any run failed.
    pub fn ensure_complete(&self) -> Result<()> {
        let failed: Vec<&RunRecord> = self.failures().collect();
        match failed.first() {
            None => Ok(()),
            Some(first) => Err(HarnessError::RunsFailed {
                failed: failed.len(),
                total: self.runs.len(),
                first: format!("run {}: {}", first.index, first.failure.as_deref().unwrap_or("")),
            }),
        }
    }

    fn control_len(&self) -> usize {
        self.reference
            .as_ref()
            .and_then(|r| r.control.as_ref().map(Vec::len))
            .or_else(|| self.aggregate.control.as_ref().map(Vec::len))
            .unwrap_or(0)
    }

    /// One row per run followed by one `aggregate=true` row. Standard
    /// deviations are only filled in the aggregate row; references and
    /// relative errors in every row (per run or of the mean).
    pub fn to_table(&self) -> Table {
        let d = self.dim;
        let c = self.control_len();
        let mut columns: Vec<String> = [
            "run",
            "aggregate",
            "seed",
            "failed",
            "runtime_s",
            "clamps",
            "u",
            "std_u",
            "ref_u",
            "rel_err_u",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for j in 1..=d {
            columns.extend([
                format!("z_{j}"),
                format!("std_z_{j}"),
                format!("ref_z_{j}"),
                format!("rel_err_z_{j}"),
            ]);
        }
        columns.extend([
            "gamma_11".to_string(),
            "std_gamma_11".to_string(),
            "ref_gamma_11".to_string(),
        ]);
        for k in 1..=c {
            columns.extend([
                format!("control_{k}"),
                format!("std_control_{k}"),
                format!("ref_control_{k}"),
                format!("rel_err_control_{k}"),
            ]);
        }
        let mut table = Table::new(columns);
        let reference = self.reference.as_ref();
        let ref_u = reference.map(|r| r.u);
        let ref_z = |j: usize| reference.map(|r| r.z[j]);
        let ref_c = |k: usize| reference.and_then(|r| r.control.as_ref().map(|v| v[k]));
        let rel = |v: Option<f64>, r: Option<f64>| Cell::num(v.zip(r).map(|(v, r)| relative_error(v, r)));

        for run in &self.runs {
            let e = run.estimate.as_ref();
            let u = e.map(|e| e.u);
            let mut row = vec![
                Cell::Int(run.index as u64),
                Cell::Bool(false),
                Cell::Int(run.seed),
                Cell::Bool(run.failure.is_some()),
                Cell::Num(run.runtime_s),
                Cell::Int(run.clamps),
                Cell::num(u),
                Cell::Empty,
                Cell::num(ref_u),
                rel(u, ref_u),
            ];
            for j in 0..d {
                let z = e.map(|e| e.z[j]);
                row.extend([Cell::num(z), Cell::Empty, Cell::num(ref_z(j)), rel(z, ref_z(j))]);
            }
            row.extend([
                Cell::num(e.map(|e| e.gamma00)),
                Cell::Empty,
                Cell::num(reference.map(|r| r.gamma00)),
            ]);
            for k in 0..c {
                let v = e.and_then(|e| e.control.as_ref().map(|v| v[k]));
                row.extend([Cell::num(v), Cell::Empty, Cell::num(ref_c(k)), rel(v, ref_c(k))]);
            }
            table.push(row);
        }

        let a = &self.aggregate;
        let mut row = vec![
            Cell::Empty,
            Cell::Bool(true),
            Cell::Int(self.config.seed),
            Cell::Bool(a.successes < self.runs.len()),
            Cell::Num(a.runtime_s.mean),
            Cell::Num(a.clamps.mean),
            Cell::Num(a.u.mean),
            Cell::Num(a.u.std),
            Cell::num(ref_u),
            rel(Some(a.u.mean), ref_u),
        ];
        for j in 0..d {
            row.extend([
                Cell::Num(a.z[j].mean),
                Cell::Num(a.z[j].std),
                Cell::num(ref_z(j)),
                rel(Some(a.z[j].mean), ref_z(j)),
            ]);
        }
        row.extend([
            Cell::Num(a.gamma00.mean),
            Cell::Num(a.gamma00.std),
            Cell::num(reference.map(|r| r.gamma00)),
        ]);
        for k in 0..c {
            let s = a.control.as_ref().map(|v| v[k]);
            row.extend([
                Cell::num(s.map(|s| s.mean)),
                Cell::num(s.map(|s| s.std)),
                Cell::num(ref_c(k)),
                rel(s.map(|s| s.mean), ref_c(k)),
            ]);
        }
        table.push(row);
        table
    }

    /// Training logs of every run, in run order.
    pub fn log_table(&self) -> Table {
        let mut table = Table::new(["run", "step", "outer", "validation_loss", "lr", "clamps"]);
        for run in &self.runs {
            for r in &run.log {
                table.push(vec![
                    Cell::Int(run.index as u64),
                    Cell::Int(r.step as u64),
                    Cell::Int(r.outer as u64),
                    Cell::Num(r.validation_loss),
                    Cell::Num(r.lr),
                    Cell::Int(r.clamps),
                ]);
            }
        }
        table
    }

    pub fn summary(&self) -> String {
        let a = &self.aggregate;
        let mut s = format!(
            "{} d={} N={} mode={} runs={}/{}: u = {:.6} ± {:.6}",
            self.config.problem,
            self.dim,
            self.config.steps,
            mode_name(self.config.mode),
            a.successes,
            self.runs.len(),
            a.u.mean,
            a.u.std
        );
        if let (Some(r), Some(e)) = (&self.reference, self.rel_err_u()) {
            s += &format!(" (ref {:.6}, rel err {:.3e})", r.u, e);
        }
        if let Some(z) = a.z.first() {
            s += &format!(", z_1 = {:.6} ± {:.6}", z.mean, z.std);
        }
        if let Some(c) = a.control.as_ref().and_then(|c| c.first()) {
            s += &format!(", control_1 = {:.6} ± {:.6}", c.mean, c.std);
        }
        s
    }
}

/// Oracle `(u, z, γ₁₁, control)` at `(0, x₀)`.
pub fn reference_at_origin(problem: &dyn Problem) -> Option<Estimate> {
    let x0 = problem.initial_state();
    let jet = problem.exact(0.0, x0)?;
    let control = problem.control(x0, &jet.gradient, &jet.hessian, &Clamps::new());
    Some(Estimate {
        u: jet.value,
        z: jet.gradient,
        gamma00: jet.hessian[0],
        control,
    })
}

fn single_run(cfg: &RunConfig, problem: &dyn Problem, grid: &TimeGrid, index: usize) -> RunRecord {
    let seed = run_seed(cfg.seed, index as u64);
    let scheme = cfg.scheme_config(problem, seed);
    let start = Instant::now();
    let outcome = solve_backward(problem, grid, &scheme).and_then(|sol| {
        let x0 = problem.initial_state();
        let e = sol.evaluate(0, x0)?;
        let control = problem.control(x0, &e.z, &e.gamma, &Clamps::new());
        let estimate = Estimate {
            u: e.u,
            gamma00: e.gamma[0],
            z: e.z,
            control,
        };
        Ok((estimate, sol.clamps, sol.log().copied().collect::<Vec<_>>()))
    });
    let runtime_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok((estimate, clamps, log)) => RunRecord {
            index,
            seed,
            estimate: Some(estimate),
            failure: None,
            runtime_s,
            clamps,
            log,
        },
        Err(e) => RunRecord {
            index,
            seed,
            estimate: None,
            failure: Some(e.to_string()),
            runtime_s,
            clamps: 0,
            log: Vec::new(),
        },
    }
}

pub fn aggregate(runs: &[RunRecord], dim: usize) -> Aggregate {
    let ok: Vec<&Estimate> = runs.iter().filter_map(|r| r.estimate.as_ref()).collect();
    let stats = |f: &dyn Fn(&Estimate) -> f64| Stats::of(&ok.iter().map(|e| f(e)).collect::<Vec<_>>());
    let control_len = ok.first().and_then(|e| e.control.as_ref().map(Vec::len));
    let ok_runs: Vec<&RunRecord> = runs.iter().filter(|r| r.estimate.is_some()).collect();
    Aggregate {
        successes: ok.len(),
        u: stats(&|e| e.u),
        z: (0..dim).map(|j| stats(&|e| e.z[j])).collect(),
        gamma00: stats(&|e| e.gamma00),
        control: control_len.map(|c| {
            (0..c)
                .map(|k| stats(&|e| e.control.as_ref().map_or(f64::NAN, |v| v[k])))
                .collect()
        }),
        runtime_s: Stats::of(&ok_runs.iter().map(|r| r.runtime_s).collect::<Vec<_>>()),
        clamps: Stats::of(&ok_runs.iter().map(|r| r.clamps as f64).collect::<Vec<_>>()),
    }
}

/// Worker count from `DBS_WORKERS`; `None` leaves the choice to rayon.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_VAR) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(HarnessError::Invalid(format!(
                "{WORKERS_VAR}={s} is not a positive integer"
            ))),
        },
    }
}

/// `R` independent runs with per-run seeds derived from the master seed.
/// Runs execute in parallel; results are assembled in run order. Failed runs
/// are recorded with their message and excluded from the aggregates.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let problem = build_problem(&cfg.problem, &cfg.problem_options())?;
    let grid = TimeGrid::uniform(problem.maturity(), cfg.steps)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers_from_env()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Invalid(format!("thread pool: {e}")))?;
    let problem_ref = problem.as_ref();
    let runs: Vec<RunRecord> = pool.install(|| {
        (0..cfg.runs)
            .into_par_iter()
            .map(|i| single_run(cfg, problem_ref, &grid, i))
            .collect()
    });
    let dim = problem.dim();
    Ok(RunReport {
        config: cfg.clone(),
        dim,
        x0: problem.initial_state().to_vec(),
        aggregate: aggregate(&runs, dim),
        runs,
        reference: reference_at_origin(problem_ref),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value_has_zero_std() {
        assert_eq!(Stats::of(&[3.5]), Stats { mean: 3.5, std: 0.0 });
        let s = Stats::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(Stats::of(&[]).mean.is_nan());
    }

    #[test]
    fn relative_error_formula() {
        assert!((relative_error(-0.6, -0.59571) - 0.00429 / 0.59571).abs() < 1e-15);
    }

    #[test]
    fn failed_runs_are_excluded() {
        let ok = |i: usize, u: f64| RunRecord {
            index: i,
            seed: i as u64,
            estimate: Some(Estimate {
                u,
                z: vec![2.0 * u],
                gamma00: 0.0,
                control: None,
            }),
            failure: None,
            runtime_s: 1.0,
            clamps: 0,
            log: Vec::new(),
        };
        let mut bad = ok(2, 0.0);
        bad.estimate = None;
        bad.failure = Some("diverged".into());
        let a = aggregate(&[ok(0, 1.0), ok(1, 3.0), bad], 1);
        assert_eq!(a.successes, 2);
        assert_eq!(a.u.mean, 2.0);
        assert_eq!(a.z[0].mean, 4.0);
        assert!(a.control.is_none());
    }
}
