use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::oracles::merton_exact;
use crate::problem::{Clamps, GenArgs, GeneratorGrad, Jet, Problem};
use crate::sde::Dynamics;
use crate::truncation::TruncationKind;
use crate::{Error, Result};

/// Merton problem with constant premium: `f = −½λ²z²/γ`, `g = −e^{−ηx}`,
/// trained under `X = x0 + λt + W`.
#[derive(Debug, Clone)]
pub struct Merton {
    pub lambda: f64,
    pub eta: f64,
    /// Constant asset volatility, used only by the control map.
    pub volatility: f64,
    maturity: f64,
    x0: Vec<f64>,
    dynamics: Dynamics,
}

impl Merton {
    pub fn new(lambda: f64, eta: f64, volatility: f64, maturity: f64, sigma_hat: f64) -> Result<Self> {
        if !(eta > 0.0) || !(volatility > 0.0) || !(maturity > 0.0) || !(sigma_hat >= 0.0) {
            return Err(Error::Config("merton needs η, σ, T > 0 and σ̂ ≥ 0".into()));
        }
        Ok(Self {
            lambda,
            eta,
            volatility,
            maturity,
            x0: vec![1.0],
            dynamics: Dynamics::diagonal(vec![lambda], &[sigma_hat])?,
        })
    }

    /// `λ = 0.6`, `η = 0.5`, `σ = e^{0.4}`.
    pub fn standard(maturity: f64) -> Result<Self> {
        Self::new(0.6, 0.5, (0.4f64).exp(), maturity, 1.0)
    }
}

impl Problem for Merton {
    fn name(&self) -> &str {
        "merton"
    }

    fn dim(&self) -> usize {
        1
    }

    fn maturity(&self) -> f64 {
        self.maturity
    }

    fn initial_state(&self) -> &[f64] {
        &self.x0
    }

    fn generator(&self, a: &GenArgs<'_>, clamps: &Clamps) -> f64 {
        let l2 = self.lambda * self.lambda;
        -0.5 * l2 * a.z[0] * a.z[0] / clamps.guard(a.gamma[0])
    }

    fn generator_grad(&self, a: &GenArgs<'_>, clamps: &Clamps, grad: &mut GeneratorGrad) -> f64 {
        let l2 = self.lambda * self.lambda;
        let z = a.z[0];
        let (g, clamped) = clamps.guard_flag(a.gamma[0]);
        grad.clear();
        grad.dz[0] = -l2 * z / g;
        if !clamped {
            grad.dgamma[0] = 0.5 * l2 * z * z / (g * g);
        }
        -0.5 * l2 * z * z / g
    }

    fn terminal(&self, x: &[f64]) -> f64 {
        -(-self.eta * x[0]).exp()
    }

    fn terminal_grad(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.eta * (-self.eta * x[0]).exp();
    }

    fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    fn truncation_kind(&self) -> TruncationKind {
        TruncationKind::Drifted
    }

    fn default_quantile(&self) -> Option<f64> {
        Some(0.98)
    }

    fn default_architecture(&self) -> (usize, usize) {
        (2, 11)
    }

    fn exact(&self, t: f64, x: &[f64]) -> Option<Jet> {
        Some(merton_exact(t, x[0], self.lambda, self.eta, self.maturity))
    }

    /// `â = −(1/σ) λ z/γ`.
    fn control(&self, _x: &[f64], z: &[f64], gamma: &[f64], clamps: &Clamps) -> Option<Vec<f64>> {
        Some(vec![-self.lambda * z[0] / (self.volatility * clamps.guard(gamma[0]))])
    }
}
