//! Grids of experiments over the number of steps and the training diffusion
//! scale, optionally also over the quantile and the width.

use crate::config::{Quantile, RunConfig};
use crate::error::{HarnessError, Result};
use crate::experiment::{run_experiment, RunReport};
use crate::table::{Cell, Table};

pub const STUDY_COLUMNS: [&str; 13] = [
    "problem",
    "d",
    "N",
    "sigma_hat",
    "p",
    "m",
    "mean_u",
    "std_u",
    "ref_u",
    "rel_err",
    "mean_z",
    "std_z",
    "runtime_s",
];

/// Axes of a study. `steps` must be nonempty; an empty `sigma_hat`,
/// `quantiles` or `widths` keeps the base value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StudyGrid {
    pub steps: Vec<usize>,
    pub sigma_hat: Vec<f64>,
    pub quantiles: Vec<Quantile>,
    pub widths: Vec<usize>,
}

impl StudyGrid {
    pub fn new(steps: Vec<usize>, sigma_hat: Vec<f64>) -> Self {
        Self {
            steps,
            sigma_hat,
            ..Default::default()
        }
    }

    /// Cell configurations in row order: `N` outermost, then `σ̂`, `p`, `m`.
    pub fn cells(&self, base: &RunConfig) -> Result<Vec<RunConfig>> {
        if self.steps.is_empty() {
            return Err(HarnessError::Invalid("the N grid must be nonempty".into()));
        }
        let sigmas: Vec<Option<f64>> = if self.sigma_hat.is_empty() {
            vec![base.sigma_hat]
        } else {
            self.sigma_hat.iter().map(|s| Some(*s)).collect()
        };
        let quantiles = if self.quantiles.is_empty() {
            vec![base.quantile]
        } else {
            self.quantiles.clone()
        };
        let widths: Vec<Option<usize>> = if self.widths.is_empty() {
            vec![base.width]
        } else {
            self.widths.iter().map(|m| Some(*m)).collect()
        };
        let mut cells = Vec::new();
        for &n in &self.steps {
            for &s in &sigmas {
                for &p in &quantiles {
                    for &m in &widths {
                        let mut cfg = base.clone();
                        cfg.steps = n;
                        cfg.sigma_hat = s;
                        cfg.quantile = p;
                        cfg.width = m;
                        cells.push(cfg);
                    }
                }
            }
        }
        Ok(cells)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub reports: Vec<RunReport>,
}

impl StudyTable {
    pub fn to_table(&self) -> Table {
        let mut table = Table::new(STUDY_COLUMNS);
        for r in &self.reports {
            table.push(study_row(r));
        }
        table
    }
}

fn study_row(r: &RunReport) -> Vec<Cell> {
    let c = &r.config;
    let a = &r.aggregate;
    let p = match c.quantile {
        Quantile::Value(p) => Cell::Num(p),
        q => Cell::Text(q.to_string()),
    };
    let width = match c.width {
        Some(m) => Cell::Int(m as u64),
        None => Cell::Text("default".into()),
    };
    vec![
        Cell::Text(c.problem.clone()),
        Cell::Int(r.dim as u64),
        Cell::Int(c.steps as u64),
        Cell::num(c.sigma_hat),
        p,
        width,
        Cell::Num(a.u.mean),
        Cell::Num(a.u.std),
        Cell::num(r.reference.as_ref().map(|e| e.u)),
        Cell::num(r.rel_err_u()),
        Cell::num(a.z.first().map(|s| s.mean)),
        Cell::num(a.z.first().map(|s| s.std)),
        Cell::Num(a.runtime_s.mean),
    ]
}

/// One experiment per grid cell, in the order of [`StudyGrid::cells`].
pub fn convergence_study(base: &RunConfig, grid: &StudyGrid) -> Result<StudyTable> {
    let cells = grid.cells(base)?;
    for cfg in &cells {
        cfg.validate()?;
    }
    let reports = cells.iter().map(run_experiment).collect::<Result<Vec<_>>>()?;
    Ok(StudyTable { reports })
}

/// Parses a comma-separated list such as `10,20,40`.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if items.is_empty() {
        return Err("empty list".into());
    }
    items
        .iter()
        .map(|v| v.parse().map_err(|_| format!("invalid list entry `{v}`")))
        .collect()
}
