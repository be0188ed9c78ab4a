use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::scaled_identity;
use crate::oracles::case1_exact;
use crate::problem::{Clamps, GenArgs, GeneratorGrad, Jet, Problem};
use crate::sde::{Drift, Dynamics};
use crate::truncation::TruncationKind;
use crate::{Error, Result};

/// `f = y tr γ + y/2 + 2y² − 2y⁴e^{−(T−t)}`, `g = tanh(Σxᵢ/√d)`, trained
/// under `X = x0 + σ̂/√d W`.
#[derive(Debug, Clone)]
pub struct Case1 {
    dim: usize,
    maturity: f64,
    x0: Vec<f64>,
    dynamics: Dynamics,
}

impl Case1 {
    pub fn new(dim: usize, maturity: f64, sigma_hat: f64) -> Result<Self> {
        if dim == 0 || !(maturity > 0.0) || !(sigma_hat >= 0.0) {
            return Err(Error::Config("case1 needs d ≥ 1, T > 0 and σ̂ ≥ 0".into()));
        }
        let rd = (dim as f64).sqrt();
        let dynamics = Dynamics::new(
            dim,
            Drift::Constant(vec![0.0; dim]),
            scaled_identity(dim, sigma_hat / rd),
        )?;
        Ok(Self {
            dim,
            maturity,
            x0: vec![0.5 / rd; dim],
            dynamics,
        })
    }
}

impl Problem for Case1 {
    fn name(&self) -> &str {
        "case1"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn maturity(&self) -> f64 {
        self.maturity
    }

    fn initial_state(&self) -> &[f64] {
        &self.x0
    }

    fn generator(&self, a: &GenArgs<'_>, _clamps: &Clamps) -> f64 {
        let d = self.dim;
        let tr: f64 = (0..d).map(|j| a.gamma[j * d + j]).sum();
        let y = a.y;
        y * tr + y / 2.0 + 2.0 * y * y - 2.0 * y.powi(4) * (-(self.maturity - a.t)).exp()
    }

    fn generator_grad(&self, a: &GenArgs<'_>, clamps: &Clamps, grad: &mut GeneratorGrad) -> f64 {
        let d = self.dim;
        let tr: f64 = (0..d).map(|j| a.gamma[j * d + j]).sum();
        let y = a.y;
        grad.clear();
        grad.dy = tr + 0.5 + 4.0 * y - 8.0 * y.powi(3) * (-(self.maturity - a.t)).exp();
        for j in 0..d {
            grad.dgamma[j * d + j] = y;
        }
        self.generator(a, clamps)
    }

    fn terminal(&self, x: &[f64]) -> f64 {
        (x.iter().sum::<f64>() / (self.dim as f64).sqrt()).tanh()
    }

    fn terminal_grad(&self, x: &[f64], out: &mut [f64]) {
        let rd = (self.dim as f64).sqrt();
        let th = (x.iter().sum::<f64>() / rd).tanh();
        out.iter_mut().for_each(|o| *o = (1.0 - th * th) / rd);
    }

    fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    fn truncation_kind(&self) -> TruncationKind {
        TruncationKind::Static
    }

    fn default_quantile(&self) -> Option<f64> {
        Some(0.999)
    }

    fn default_architecture(&self) -> (usize, usize) {
        (2, 20)
    }

    fn exact(&self, t: f64, x: &[f64]) -> Option<Jet> {
        Some(case1_exact(t, x, self.maturity))
    }
}
