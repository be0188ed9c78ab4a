use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::oracles::scott::{FactorParams, ScottSolution};
use crate::problem::{Clamps, GenArgs, GeneratorGrad, Jet, Problem};
use crate::sde::Dynamics;
use crate::truncation::TruncationKind;
use crate::{Error, Result};

/// Premium slopes of the named multi-factor sets; the `n`-factor set takes
/// the first `n` entries of each vector.
pub const LAMBDA: [f64; 9] = [1.5, 1.1, 2.0, 0.8, 0.5, 1.7, 0.9, 1.0, 0.9];
pub const THETA: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.25, 0.15, 0.18, 0.08, 0.91];
pub const NU: [f64; 9] = [0.2, 0.15, 0.25, 0.31, 0.4, 0.35, 0.22, 0.4, 0.15];
pub const KAPPA: [f64; 9] = [1.0, 0.8, 1.1, 1.3, 0.95, 0.99, 1.02, 1.06, 1.6];

/// Utility, factor parameters and training drift of a portfolio problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    pub eta: f64,
    pub factors: Vec<FactorParams>,
    /// Drift of the wealth coordinate in the training dynamics.
    pub wealth_drift: f64,
}

impl ParameterSet {
    /// One factor with leverage: `η = 0.5, λ = 1.5, θ = 0.4, ν = 0.4, κ = 1,
    /// ρ = −0.7`, trained with wealth drift `λθ`.
    pub fn one_asset() -> Self {
        let f = FactorParams {
            kappa: 1.0,
            theta: 0.4,
            nu: 0.4,
            lambda: 1.5,
            rho: -0.7,
        };
        Self {
            eta: 0.5,
            wealth_drift: f.lambda * f.theta,
            factors: vec![f],
        }
    }

    /// Uncorrelated factors. `n = 1` uses `λ = 1.5, θ = 0.4, ν = 0.2, κ = 1`;
    /// larger `n` take the leading entries of the tabulated vectors.
    pub fn no_leverage(n: usize) -> Result<Self> {
        let factors = match n {
            1 => vec![FactorParams {
                kappa: 1.0,
                theta: 0.4,
                nu: 0.2,
                lambda: 1.5,
                rho: 0.0,
            }],
            2..=9 => (0..n)
                .map(|i| FactorParams {
                    kappa: KAPPA[i],
                    theta: THETA[i],
                    nu: NU[i],
                    lambda: LAMBDA[i],
                    rho: 0.0,
                })
                .collect(),
            _ => {
                return Err(Error::Config(format!(
                    "no parameter set for {n} factors (expected 1 to 9)"
                )))
            }
        };
        Ok(Self {
            eta: 0.5,
            factors,
            wealth_drift: 0.0,
        })
    }
}

/// Exponential-utility portfolio choice with Scott volatility factors. The
/// state is `(x, v₁, …, vₙ)`.
#[derive(Debug, Clone)]
pub struct Portfolio {
    name: String,
    params: ParameterSet,
    maturity: f64,
    x0: Vec<f64>,
    dynamics: Dynamics,
    quantile: f64,
    oracle: ScottSolution,
}

impl Portfolio {
    /// Training dynamics: wealth drift from the set, wealth diffusion
    /// `sigma_hat`, factor diffusions `νᵢ`, no drift on the factors and
    /// independent noises.
    pub fn new(name: &str, params: ParameterSet, maturity: f64, sigma_hat: f64, quantile: f64) -> Result<Self> {
        if !(params.eta > 0.0) || !(maturity > 0.0) || !(sigma_hat >= 0.0) || params.factors.is_empty() {
            return Err(Error::Config("portfolio needs η, T > 0, σ̂ ≥ 0 and a factor".into()));
        }
        for f in &params.factors {
            if !(f.kappa > 0.0 && f.theta > 0.0 && f.nu > 0.0 && f.rho.abs() < 1.0) {
                return Err(Error::Config("factor parameters need κ, θ, ν > 0 and |ρ| < 1".into()));
            }
        }
        let n = params.factors.len();
        let mut drift = vec![0.0; n + 1];
        drift[0] = params.wealth_drift;
        let mut diag = vec![sigma_hat];
        diag.extend(params.factors.iter().map(|f| f.nu));
        let mut x0 = vec![1.0];
        x0.extend(params.factors.iter().map(|f| f.theta));
        let oracle = ScottSolution::new(params.eta, maturity, params.factors.clone());
        Ok(Self {
            name: name.into(),
            dynamics: Dynamics::diagonal(drift, &diag)?,
            params,
            maturity,
            x0,
            quantile,
            oracle,
        })
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn oracle(&self) -> &ScottSolution {
        &self.oracle
    }

    fn sharpe(&self, v: &[f64]) -> f64 {
        self.params
            .factors
            .iter()
            .zip(v)
            .map(|(f, vi)| (f.lambda * vi).powi(2))
            .sum()
    }
}

impl Problem for Portfolio {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.params.factors.len() + 1
    }

    fn maturity(&self) -> f64 {
        self.maturity
    }

    fn initial_state(&self) -> &[f64] {
        &self.x0
    }

    fn generator(&self, a: &GenArgs<'_>, clamps: &Clamps) -> f64 {
        let d = self.dim();
        let v = &a.x[1..];
        let g00 = clamps.guard(a.gamma[0]);
        let z0 = a.z[0];
        let mut f = -0.5 * self.sharpe(v) * z0 * z0 / g00;
        for (i, p) in self.params.factors.iter().enumerate() {
            let k = i + 1;
            let g0i = a.gamma[k];
            f += p.kappa * (p.theta - v[i]) * a.z[k] + 0.5 * p.nu * p.nu * a.gamma[k * d + k];
            f -= p.rho * p.lambda * v[i] * p.nu * z0 * g0i / g00;
            f -= 0.5 * p.rho * p.rho * p.nu * p.nu * g0i * g0i / g00;
        }
        f
    }

    fn generator_grad(&self, a: &GenArgs<'_>, clamps: &Clamps, grad: &mut GeneratorGrad) -> f64 {
        let d = self.dim();
        let v = &a.x[1..];
        let (g00, clamped) = clamps.guard_flag(a.gamma[0]);
        let z0 = a.z[0];
        let r = self.sharpe(v);
        grad.clear();
        let mut numer = 0.5 * r * z0 * z0;
        grad.dz[0] = -r * z0 / g00;
        for (i, p) in self.params.factors.iter().enumerate() {
            let k = i + 1;
            let g0i = a.gamma[k];
            let lev = p.rho * p.lambda * v[i] * p.nu;
            let cross = p.rho * p.rho * p.nu * p.nu;
            grad.dz[k] = p.kappa * (p.theta - v[i]);
            grad.dz[0] -= lev * g0i / g00;
            grad.dgamma[k * d + k] = 0.5 * p.nu * p.nu;
            grad.dgamma[k] = -(lev * z0 + cross * g0i) / g00;
            numer += lev * z0 * g0i + 0.5 * cross * g0i * g0i;
        }
        if !clamped {
            grad.dgamma[0] = numer / (g00 * g00);
        }
        self.generator(a, clamps)
    }

    fn terminal(&self, x: &[f64]) -> f64 {
        -(-self.params.eta * x[0]).exp()
    }

    fn terminal_grad(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        out[0] = self.params.eta * (-self.params.eta * x[0]).exp();
    }

    fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    fn truncation_kind(&self) -> TruncationKind {
        TruncationKind::Drifted
    }

    fn default_quantile(&self) -> Option<f64> {
        Some(self.quantile)
    }

    fn default_architecture(&self) -> (usize, usize) {
        (2, self.dim() + 10)
    }

    fn exact(&self, t: f64, x: &[f64]) -> Option<Jet> {
        Some(self.oracle.exact(t, x))
    }

    /// `âᵢ = −e^{−vᵢ}(λᵢvᵢ z₀/γ₀₀ + ρᵢνᵢ γ₀ᵢ/γ₀₀)`.
    fn control(&self, x: &[f64], z: &[f64], gamma: &[f64], clamps: &Clamps) -> Option<Vec<f64>> {
        let g00 = clamps.guard(gamma[0]);
        Some(
            self.params
                .factors
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let v = x[i + 1];
                    -(-v).exp() * (p.lambda * v * z[0] / g00 + p.rho * p.nu * gamma[i + 1] / g00)
                })
                .collect(),
        )
    }
}
