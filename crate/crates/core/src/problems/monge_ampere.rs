use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::scaled_identity;
use crate::linalg::{cofactor, det};
use crate::oracles::monge_ampere_exact;
use crate::problem::{Clamps, GenArgs, GeneratorGrad, Jet, Problem};
use crate::sde::{Drift, Dynamics};
use crate::truncation::TruncationKind;
use crate::{Error, Result};

/// Parabolic Monge–Ampère equation `∂ₜu + det D²u = h(x)` built so that
/// `u = g + T − t` with `g = cos(Σxᵢ/√d)`.
#[derive(Debug, Clone)]
pub struct MongeAmpere {
    dim: usize,
    maturity: f64,
    x0: Vec<f64>,
    dynamics: Dynamics,
}

impl MongeAmpere {
    pub fn new(dim: usize, maturity: f64, sigma_hat: f64) -> Result<Self> {
        if dim == 0 || !(maturity > 0.0) || !(sigma_hat >= 0.0) {
            return Err(Error::Config("monge-ampere needs d ≥ 1, T > 0 and σ̂ ≥ 0".into()));
        }
        let dynamics = Dynamics::new(dim, Drift::Constant(vec![0.0; dim]), scaled_identity(dim, sigma_hat))?;
        Ok(Self {
            dim,
            maturity,
            x0: vec![1.0; dim],
            dynamics,
        })
    }

    /// `h = det D²g − 1`; `D²g` has rank one when `d ≥ 2`.
    pub fn source(&self, x: &[f64]) -> f64 {
        if self.dim == 1 {
            -x[0].cos() - 1.0
        } else {
            -1.0
        }
    }
}

impl Problem for MongeAmpere {
    fn name(&self) -> &str {
        "monge-ampere"
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
        det(a.gamma, self.dim) - self.source(a.x)
    }

    fn generator_grad(&self, a: &GenArgs<'_>, clamps: &Clamps, grad: &mut GeneratorGrad) -> f64 {
        grad.clear();
        cofactor(a.gamma, self.dim, &mut grad.dgamma);
        self.generator(a, clamps)
    }

    fn terminal(&self, x: &[f64]) -> f64 {
        (x.iter().sum::<f64>() / (self.dim as f64).sqrt()).cos()
    }

    fn terminal_grad(&self, x: &[f64], out: &mut [f64]) {
        let rd = (self.dim as f64).sqrt();
        let s = (x.iter().sum::<f64>() / rd).sin();
        out.iter_mut().for_each(|o| *o = -s / rd);
    }

    fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    fn truncation_kind(&self) -> TruncationKind {
        TruncationKind::Static
    }

    fn default_quantile(&self) -> Option<f64> {
        None
    }

    fn default_architecture(&self) -> (usize, usize) {
        (3, self.dim + 10)
    }

    fn exact(&self, t: f64, x: &[f64]) -> Option<Jet> {
        Some(monge_ampere_exact(t, x, self.maturity))
    }
}
