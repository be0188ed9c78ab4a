use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::scaled_identity;
use crate::oracles::riccati::{LqParams, RiccatiSolution, DEFAULT_MESH};
use crate::problem::{Clamps, GenArgs, GeneratorGrad, Jet, Problem};
use crate::sde::{Drift, Dynamics};
use crate::truncation::TruncationKind;
use crate::{Error, Result};

/// Linear-quadratic control with a scalar control entering drift and
/// volatility:
/// `f = xᵀQx + Ax·z − ½|Bᵀz|²/(DᵀγD + 2N)`, `g = xᵀPx`.
#[derive(Debug, Clone)]
pub struct LinearQuadratic {
    riccati: RiccatiSolution,
    x0: Vec<f64>,
    dynamics: Dynamics,
}

impl LinearQuadratic {
    pub fn new(params: LqParams, sigma_hat: f64) -> Result<Self> {
        let d = params.dim;
        if d == 0 || !(params.maturity > 0.0) || !(sigma_hat >= 0.0) {
            return Err(Error::Config("lq needs d ≥ 1, T > 0 and σ̂ ≥ 0".into()));
        }
        let sigma = scaled_identity(d, sigma_hat / (d as f64).sqrt());
        let dynamics = Dynamics::new(d, Drift::Linear(params.a.clone()), sigma)?;
        let riccati = RiccatiSolution::solve(params, DEFAULT_MESH)?;
        Ok(Self {
            riccati,
            x0: vec![1.0; d],
            dynamics,
        })
    }

    pub fn params(&self) -> &LqParams {
        self.riccati.params()
    }

    pub fn riccati(&self) -> &RiccatiSolution {
        &self.riccati
    }

    fn parts(&self, a: &GenArgs<'_>) -> (f64, f64, f64) {
        let p = self.params();
        let d = p.dim;
        let mut quad = 0.0;
        let mut drift = 0.0;
        for r in 0..d {
            let mut qx = 0.0;
            let mut ax = 0.0;
            for c in 0..d {
                qx += p.q[r * d + c] * a.x[c];
                ax += p.a[r * d + c] * a.x[c];
            }
            quad += a.x[r] * qx;
            drift += ax * a.z[r];
        }
        let bz: f64 = p.b.iter().zip(a.z).map(|(b, z)| b * z).sum();
        let mut dgd = 0.0;
        for r in 0..d {
            for c in 0..d {
                dgd += p.d[r] * a.gamma[r * d + c] * p.d[c];
            }
        }
        (quad + drift, bz, dgd + 2.0 * p.n)
    }
}

impl Problem for LinearQuadratic {
    fn name(&self) -> &str {
        "lq"
    }

    fn dim(&self) -> usize {
        self.params().dim
    }

    fn maturity(&self) -> f64 {
        self.params().maturity
    }

    fn initial_state(&self) -> &[f64] {
        &self.x0
    }

    fn generator(&self, a: &GenArgs<'_>, clamps: &Clamps) -> f64 {
        let (lin, bz, den) = self.parts(a);
        lin - 0.5 * bz * bz / clamps.guard(den)
    }

    fn generator_grad(&self, a: &GenArgs<'_>, clamps: &Clamps, grad: &mut GeneratorGrad) -> f64 {
        let p = self.params();
        let d = p.dim;
        let (lin, bz, den) = self.parts(a);
        let (den, clamped) = clamps.guard_flag(den);
        grad.clear();
        for r in 0..d {
            let ax: f64 = (0..d).map(|c| p.a[r * d + c] * a.x[c]).sum();
            grad.dz[r] = ax - bz / den * p.b[r];
        }
        if !clamped {
            let w = 0.5 * bz * bz / (den * den);
            for r in 0..d {
                for c in 0..d {
                    grad.dgamma[r * d + c] = w * p.d[r] * p.d[c];
                }
            }
        }
        lin - 0.5 * bz * bz / den
    }

    fn terminal(&self, x: &[f64]) -> f64 {
        let p = self.params();
        let d = p.dim;
        (0..d)
            .map(|r| x[r] * (0..d).map(|c| p.p[r * d + c] * x[c]).sum::<f64>())
            .sum()
    }

    fn terminal_grad(&self, x: &[f64], out: &mut [f64]) {
        let p = self.params();
        let d = p.dim;
        for r in 0..d {
            out[r] = (0..d).map(|c| (p.p[r * d + c] + p.p[c * d + r]) * x[c]).sum();
        }
    }

    fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    fn truncation_kind(&self) -> TruncationKind {
        TruncationKind::OuExponential
    }

    fn default_quantile(&self) -> Option<f64> {
        Some(0.999)
    }

    fn default_architecture(&self) -> (usize, usize) {
        (2, 50)
    }

    fn exact(&self, t: f64, x: &[f64]) -> Option<Jet> {
        Some(self.riccati.exact(t, x))
    }
}
