//! Problem interface: generator, terminal condition, training dynamics and
//! reference solution of one PDE `∂ₜu + f(t, x, u, Du, D²u) = 0, u(T) = g`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

pub use crate::sde::{Drift, Dynamics};
use crate::truncation::TruncationKind;

/// Smallest admissible magnitude of a generator denominator.
pub const DENOMINATOR_FLOOR: f64 = 1e-6;

/// Counter of denominator clamps performed while evaluating generators.
#[derive(Debug, Default)]
pub struct Clamps(AtomicU64);

impl Clamps {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    /// Returns `den` with `|den| ≥ DENOMINATOR_FLOOR`, preserving its sign
    /// (zero maps to `+floor`), and counts the clamp.
    pub fn guard(&self, den: f64) -> f64 {
        if den.abs() >= DENOMINATOR_FLOOR {
            den
        } else {
            self.0.fetch_add(1, Ordering::Relaxed);
            if den < 0.0 {
                -DENOMINATOR_FLOOR
            } else {
                DENOMINATOR_FLOOR
            }
        }
    }

    /// Like [`Clamps::guard`], also reporting whether the value was clamped
    /// (a clamped denominator is locally constant).
    pub fn guard_flag(&self, den: f64) -> (f64, bool) {
        let g = self.guard(den);
        (g, g != den)
    }
}

/// Arguments of a generator evaluation. `gamma` is row-major `d × d`.
#[derive(Debug, Clone, Copy)]
pub struct GenArgs<'a> {
    pub t: f64,
    pub x: &'a [f64],
    pub y: f64,
    pub z: &'a [f64],
    pub gamma: &'a [f64],
}

/// Partial derivatives of a generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorGrad {
    pub dy: f64,
    pub dz: Vec<f64>,
    pub dgamma: Vec<f64>,
}

impl GeneratorGrad {
    pub fn new(dim: usize) -> Self {
        Self {
            dy: 0.0,
            dz: vec![0.0; dim],
            dgamma: vec![0.0; dim * dim],
        }
    }

    pub fn clear(&mut self) {
        self.dy = 0.0;
        self.dz.iter_mut().for_each(|v| *v = 0.0);
        self.dgamma.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Value, time derivative, gradient and Hessian (row-major) of a solution at
/// one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub time_derivative: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<f64>,
}

pub trait Problem: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn maturity(&self) -> f64;

    fn initial_state(&self) -> &[f64];

    fn generator(&self, args: &GenArgs<'_>, clamps: &Clamps) -> f64;

    /// Generator value; writes all partial derivatives into `grad`.
    fn generator_grad(&self, args: &GenArgs<'_>, clamps: &Clamps, grad: &mut GeneratorGrad) -> f64;

    fn terminal(&self, x: &[f64]) -> f64;

    fn terminal_grad(&self, x: &[f64], out: &mut [f64]);

    fn dynamics(&self) -> &Dynamics;

    fn truncation_kind(&self) -> TruncationKind;

    /// Default truncation quantile; `None` disables truncation.
    fn default_quantile(&self) -> Option<f64>;

    /// `(hidden_layers, width)` used when the caller does not choose one.
    fn default_architecture(&self) -> (usize, usize);

    /// Reference solution at `(t, x)` when one is known.
    fn exact(&self, t: f64, x: &[f64]) -> Option<Jet>;

    /// Feedback control evaluated from `(x, z, γ)`, for control problems.
    fn control(&self, _x: &[f64], _z: &[f64], _gamma: &[f64], _clamps: &Clamps) -> Option<Vec<f64>> {
        None
    }
}

impl<P: Problem + ?Sized> Problem for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn maturity(&self) -> f64 {
        (**self).maturity()
    }
    fn initial_state(&self) -> &[f64] {
        (**self).initial_state()
    }
    fn generator(&self, args: &GenArgs<'_>, clamps: &Clamps) -> f64 {
        (**self).generator(args, clamps)
    }
    fn generator_grad(&self, args: &GenArgs<'_>, clamps: &Clamps, grad: &mut GeneratorGrad) -> f64 {
        (**self).generator_grad(args, clamps, grad)
    }
    fn terminal(&self, x: &[f64]) -> f64 {
        (**self).terminal(x)
    }
    fn terminal_grad(&self, x: &[f64], out: &mut [f64]) {
        (**self).terminal_grad(x, out)
    }
    fn dynamics(&self) -> &Dynamics {
        (**self).dynamics()
    }
    fn truncation_kind(&self) -> TruncationKind {
        (**self).truncation_kind()
    }
    fn default_quantile(&self) -> Option<f64> {
        (**self).default_quantile()
    }
    fn default_architecture(&self) -> (usize, usize) {
        (**self).default_architecture()
    }
    fn exact(&self, t: f64, x: &[f64]) -> Option<Jet> {
        (**self).exact(t, x)
    }
    fn control(&self, x: &[f64], z: &[f64], gamma: &[f64], clamps: &Clamps) -> Option<Vec<f64>> {
        (**self).control(x, z, gamma, clamps)
    }
}

/// PDE residual `∂ₜu + f(t, x, u, Du, D²u)` of a jet.
pub fn residual<P: Problem + ?Sized>(problem: &P, t: f64, x: &[f64], jet: &Jet) -> f64 {
    let clamps = Clamps::new();
    let args = GenArgs {
        t,
        x,
        y: jet.value,
        z: &jet.gradient,
        gamma: &jet.hessian,
    };
    jet.time_derivative + problem.generator(&args, &clamps)
}
