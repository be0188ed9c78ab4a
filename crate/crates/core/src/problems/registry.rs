//! Problems by name.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;

use super::{Case1, LinearQuadratic, Merton, MongeAmpere, ParameterSet, Portfolio};
use crate::oracles::riccati::LqParams;
use crate::problem::Problem;
use crate::{Error, Result};

/// Registered problem names. `no-leverage-scott<n>` accepts any `n` from 1 to
/// 9; the listed ones are the tabulated sets.
pub const PROBLEM_NAMES: [&str; 9] = [
    "case1",
    "lq",
    "monge-ampere",
    "merton",
    "one-asset-scott",
    "no-leverage-scott1",
    "no-leverage-scott4",
    "no-leverage-scott7",
    "no-leverage-scott9",
];

/// Construction options. Unset fields take the problem defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProblemOptions {
    pub dim: Option<usize>,
    pub maturity: Option<f64>,
    pub sigma_hat: Option<f64>,
    /// Named parameter overrides. `key` sets a scalar (or every factor);
    /// `key.i` sets factor `i` (1-based).
    pub overrides: Vec<(String, f64)>,
}

impl ProblemOptions {
    fn take(&self, key: &str) -> Option<f64> {
        self.overrides.iter().rev().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    fn check_keys(&self, problem: &str, allowed: &[&str], indexed: bool) -> Result<()> {
        for (key, _) in &self.overrides {
            let base = key.split('.').next().unwrap_or("");
            let ok = if key.contains('.') {
                indexed && allowed.contains(&base) && key[base.len() + 1..].parse::<usize>().is_ok_and(|i| i >= 1)
            } else {
                allowed.contains(&key.as_str())
            };
            if !ok {
                return Err(Error::Config(format!("unknown parameter `{key}` for {problem}")));
            }
        }
        Ok(())
    }
}

fn fixed_dim(name: &str, opts: &ProblemOptions, dim: usize) -> Result<()> {
    match opts.dim {
        Some(d) if d != dim => Err(Error::Config(format!("{name} has dimension {dim}, not {d}"))),
        _ => Ok(()),
    }
}

/// Builds a registered problem.
pub fn build_problem(name: &str, opts: &ProblemOptions) -> Result<Box<dyn Problem>> {
    let maturity = opts.maturity.unwrap_or(1.0);
    match name {
        "case1" => {
            opts.check_keys(name, &[], false)?;
            Ok(Box::new(Case1::new(
                opts.dim.unwrap_or(1),
                maturity,
                opts.sigma_hat.unwrap_or(1.5),
            )?))
        }
        "lq" => {
            opts.check_keys(name, &["a", "b", "d", "q", "p", "n"], false)?;
            let dim = opts.dim.unwrap_or(1);
            let mut params = LqParams::defaults(dim, maturity);
            let diag = |m: &mut Vec<f64>, s: f64| {
                m.iter_mut().for_each(|v| *v = 0.0);
                for j in 0..dim {
                    m[j * dim + j] = s;
                }
            };
            if let Some(a) = opts.take("a") {
                diag(&mut params.a, a);
            }
            if let Some(q) = opts.take("q") {
                diag(&mut params.q, q);
            }
            if let Some(p) = opts.take("p") {
                diag(&mut params.p, p);
            }
            if let Some(b) = opts.take("b") {
                params.b.iter_mut().for_each(|v| *v = b);
            }
            if let Some(d) = opts.take("d") {
                params.d.iter_mut().for_each(|v| *v = d);
            }
            if let Some(n) = opts.take("n") {
                params.n = n;
            }
            Ok(Box::new(LinearQuadratic::new(params, opts.sigma_hat.unwrap_or(1.5))?))
        }
        "monge-ampere" => {
            opts.check_keys(name, &[], false)?;
            Ok(Box::new(MongeAmpere::new(
                opts.dim.unwrap_or(5),
                maturity,
                opts.sigma_hat.unwrap_or(1.0),
            )?))
        }
        "merton" => {
            opts.check_keys(name, &["lambda", "eta", "vol"], false)?;
            fixed_dim(name, opts, 1)?;
            Ok(Box::new(Merton::new(
                opts.take("lambda").unwrap_or(0.6),
                opts.take("eta").unwrap_or(0.5),
                opts.take("vol").unwrap_or_else(|| (0.4f64).exp()),
                maturity,
                opts.sigma_hat.unwrap_or(1.0),
            )?))
        }
        "one-asset-scott" => {
            let params = portfolio_overrides(name, opts, ParameterSet::one_asset())?;
            fixed_dim(name, opts, 2)?;
            Ok(Box::new(Portfolio::new(
                name,
                params,
                maturity,
                opts.sigma_hat.unwrap_or(1.0),
                0.98,
            )?))
        }
        _ => {
            let n = name
                .strip_prefix("no-leverage-scott")
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| Error::UnknownProblem(name.into()))?;
            let mut params = portfolio_overrides(name, opts, ParameterSet::no_leverage(n)?)?;
            params.factors.iter_mut().for_each(|f| f.rho = 0.0);
            fixed_dim(name, opts, n + 1)?;
            Ok(Box::new(Portfolio::new(
                name,
                params,
                maturity,
                opts.sigma_hat.unwrap_or(1.0),
                0.95,
            )?))
        }
    }
}

fn portfolio_overrides(name: &str, opts: &ProblemOptions, mut params: ParameterSet) -> Result<ParameterSet> {
    let keys: &[&str] = if name == "one-asset-scott" {
        &["eta", "lambda", "theta", "nu", "kappa", "rho"]
    } else {
        &["eta", "lambda", "theta", "nu", "kappa"]
    };
    opts.check_keys(name, keys, true)?;
    let n = params.factors.len();
    for (key, value) in &opts.overrides {
        let (base, index) = match key.split_once('.') {
            Some((b, i)) => (b, Some(i.parse::<usize>().unwrap_or(0))),
            None => (key.as_str(), None),
        };
        if base == "eta" {
            params.eta = *value;
            continue;
        }
        let targets: Vec<usize> = match index {
            Some(i) if i >= 1 && i <= n => alloc::vec![i - 1],
            Some(i) => return Err(Error::Config(format!("{name} has no factor {i}"))),
            None => (0..n).collect(),
        };
        for i in targets {
            let f = &mut params.factors[i];
            match base {
                "lambda" => f.lambda = *value,
                "theta" => f.theta = *value,
                "nu" => f.nu = *value,
                "kappa" => f.kappa = *value,
                _ => f.rho = *value,
            }
        }
    }
    if name == "one-asset-scott" {
        let f = params.factors[0];
        params.wealth_drift = f.lambda * f.theta;
    }
    Ok(params)
}
