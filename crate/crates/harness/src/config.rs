//! Run configuration and its flat `key=value` file format.
//!
//! One assignment per line; blank lines and lines starting with `#` are
//! skipped. Recognized keys:
//!
//! | key         | meaning                                   | default            |
//! |-------------|-------------------------------------------|--------------------|
//! | `problem`   | registered problem name                   | required           |
//! | `N`         | number of time steps                      | required           |
//! | `d`         | state dimension                           | problem default    |
//! | `T`         | maturity                                  | problem default    |
//! | `sigma_hat` | training diffusion scale                  | problem default    |
//! | `p`         | truncation quantile in (0, 1), or `none`  | problem default    |
//! | `m`         | neurons per hidden layer                  | problem default    |
//! | `layers`    | hidden layers                             | problem default    |
//! | `mode`      | `explicit` or `implicit`                  | `explicit`         |
//! | `R`         | independent runs                          | 10                 |
//! | `seed`      | master seed                               | 0                  |
//! | `scale`     | desk-scale factor on iterations, batches  | 0.25               |
//! | `out`       | output path                               | none               |
//! | `param.<k>` | problem parameter override                | none               |

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dbs_core::{build_problem, HessianMode, ProblemOptions, SchemeConfig};

use crate::error::{HarnessError, Result};

pub const DEFAULT_RUNS: usize = 10;
pub const DEFAULT_SCALE: f64 = 0.25;

/// Truncation setting of a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Quantile {
    /// The problem's own quantile.
    #[default]
    Default,
    Disabled,
    Value(f64),
}

impl FromStr for Quantile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "none" => Ok(Quantile::Disabled),
            "default" => Ok(Quantile::Default),
            v => {
                let p: f64 = v
                    .parse()
                    .map_err(|_| format!("`{v}` is neither a quantile nor `none`"))?;
                if p > 0.0 && p < 1.0 {
                    Ok(Quantile::Value(p))
                } else {
                    Err(format!("quantile {p} outside (0, 1)"))
                }
            }
        }
    }
}

impl fmt::Display for Quantile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantile::Default => f.write_str("default"),
            Quantile::Disabled => f.write_str("none"),
            Quantile::Value(p) => write!(f, "{p}"),
        }
    }
}

pub fn parse_mode(s: &str) -> Result<HessianMode, String> {
    match s.trim() {
        "explicit" => Ok(HessianMode::Explicit),
        "implicit" => Ok(HessianMode::Implicit),
        other => Err(format!("unknown mode `{other}`, expected explicit or implicit")),
    }
}

pub fn mode_name(mode: HessianMode) -> &'static str {
    match mode {
        HessianMode::Explicit => "explicit",
        HessianMode::Implicit => "implicit",
    }
}

/// Everything needed to reproduce an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub overrides: Vec<(String, f64)>,
    pub dim: Option<usize>,
    pub maturity: Option<f64>,
    pub steps: usize,
    pub sigma_hat: Option<f64>,
    pub quantile: Quantile,
    pub width: Option<usize>,
    pub hidden_layers: Option<usize>,
    pub mode: HessianMode,
    pub runs: usize,
    pub seed: u64,
    pub scale: f64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(problem: impl Into<String>, steps: usize) -> Self {
        Self {
            problem: problem.into(),
            overrides: Vec::new(),
            dim: None,
            maturity: None,
            steps,
            sigma_hat: None,
            quantile: Quantile::Default,
            width: None,
            hidden_layers: None,
            mode: HessianMode::Explicit,
            runs: DEFAULT_RUNS,
            seed: 0,
            scale: DEFAULT_SCALE,
            out: None,
        }
    }

    pub fn problem_options(&self) -> ProblemOptions {
        ProblemOptions {
            dim: self.dim,
            maturity: self.maturity,
            sigma_hat: self.sigma_hat,
            overrides: self.overrides.clone(),
        }
    }

    /// Scheme settings of run `seed`: the problem protocol scaled by
    /// `scale`, then the explicit overrides.
    pub fn scheme_config(&self, problem: &dyn dbs_core::Problem, seed: u64) -> SchemeConfig {
        let mut cfg = SchemeConfig::for_problem(problem).scaled(self.scale);
        cfg.mode = self.mode;
        cfg.seed = seed;
        match self.quantile {
            Quantile::Default => {}
            Quantile::Disabled => cfg.quantile = None,
            Quantile::Value(p) => cfg.quantile = Some(p),
        }
        if let Some(m) = self.width {
            cfg.width = m;
        }
        if let Some(k) = self.hidden_layers {
            cfg.hidden_layers = k;
        }
        cfg
    }

    /// Checks the invariants and that the problem builds with these options.
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(HarnessError::Invalid(msg));
        if self.steps == 0 {
            return invalid("N must be at least 1".into());
        }
        if self.runs == 0 {
            return invalid("R must be at least 1".into());
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return invalid(format!("scale {} must be positive", self.scale));
        }
        if self.width == Some(0) || self.hidden_layers == Some(0) {
            return invalid("network width and depth must be positive".into());
        }
        let problem = build_problem(&self.problem, &self.problem_options())?;
        self.scheme_config(problem.as_ref(), 0).validate()?;
        Ok(())
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| HarnessError::Parse {
        line,
        message: format!("invalid value `{value}` for `{key}`"),
    })
}

/// Parses the `key=value` format. `problem` and `N` are required; every other
/// key falls back to its default.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::new(String::new(), 0);
    let mut seen: Vec<String> = Vec::new();
    let mut has_problem = false;
    let mut has_steps = false;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| HarnessError::Parse {
            line,
            message: format!("expected key=value, found `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if seen.iter().any(|s| s == key) {
            return Err(HarnessError::Parse {
                line,
                message: format!("`{key}` assigned twice"),
            });
        }
        seen.push(key.to_string());
        match key {
            "problem" => {
                cfg.problem = value.to_string();
                has_problem = true;
            }
            "N" => {
                cfg.steps = parse_value(line, key, value)?;
                has_steps = true;
            }
            "d" => cfg.dim = Some(parse_value(line, key, value)?),
            "T" => cfg.maturity = Some(parse_value(line, key, value)?),
            "sigma_hat" => cfg.sigma_hat = Some(parse_value(line, key, value)?),
            "p" => {
                cfg.quantile = value.parse().map_err(|message| HarnessError::Parse { line, message })?;
            }
            "m" => cfg.width = Some(parse_value(line, key, value)?),
            "layers" => cfg.hidden_layers = Some(parse_value(line, key, value)?),
            "mode" => cfg.mode = parse_mode(value).map_err(|message| HarnessError::Parse { line, message })?,
            "R" => cfg.runs = parse_value(line, key, value)?,
            "seed" => cfg.seed = parse_value(line, key, value)?,
            "scale" => cfg.scale = parse_value(line, key, value)?,
            "out" => cfg.out = Some(PathBuf::from(value)),
            _ => match key.strip_prefix("param.") {
                Some(name) if !name.is_empty() => {
                    cfg.overrides.push((name.to_string(), parse_value(line, key, value)?));
                }
                _ => {
                    return Err(HarnessError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            },
        }
    }
    if !has_problem {
        return Err(HarnessError::Invalid("missing required key `problem`".into()));
    }
    if !has_steps {
        return Err(HarnessError::Invalid("missing required key `N`".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}
