//! Time grids, training dynamics and Euler–Maruyama paths.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::rng::StreamKey;
use crate::{Error, Result};

/// Discretization `0 = t_0 < t_1 < … < t_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    /// Uniform grid with `steps` intervals.
    pub fn uniform(maturity: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Config("the time grid needs at least one step".into()));
        }
        if !(maturity > 0.0) || !maturity.is_finite() {
            return Err(Error::Config("maturity must be positive".into()));
        }
        let mut nodes: Vec<f64> = (0..steps).map(|i| maturity * i as f64 / steps as f64).collect();
        nodes.push(maturity);
        Ok(Self { nodes })
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn maturity(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn time(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// `t_{i+1} − t_i`.
    pub fn dt(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }
}

/// Drift of a training diffusion.
#[derive(Debug, Clone, PartialEq)]
pub enum Drift {
    /// `μ(t, x) = b`.
    Constant(Vec<f64>),
    /// `μ(t, x) = A x`, `A` row-major `d × d`.
    Linear(Vec<f64>),
}

/// Training diffusion `dX = μ(X) dt + σ dW` with constant `σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dynamics {
    dim: usize,
    drift: Drift,
    // row-major d × d
    sigma: Vec<f64>,
}

impl Dynamics {
    pub fn new(dim: usize, drift: Drift, sigma: Vec<f64>) -> Result<Self> {
        let drift_len = match &drift {
            Drift::Constant(b) => b.len(),
            Drift::Linear(a) => {
                if a.len() != dim * dim {
                    return Err(Error::Shape {
                        expected: dim * dim,
                        actual: a.len(),
                    });
                }
                dim
            }
        };
        if drift_len != dim {
            return Err(Error::Shape {
                expected: dim,
                actual: drift_len,
            });
        }
        if sigma.len() != dim * dim {
            return Err(Error::Shape {
                expected: dim * dim,
                actual: sigma.len(),
            });
        }
        Ok(Self { dim, drift, sigma })
    }

    /// Constant drift `b` and diagonal diffusion `diag(s)`.
    pub fn diagonal(drift: Vec<f64>, diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        let mut sigma = vec![0.0; d * d];
        for (j, s) in diag.iter().enumerate() {
            sigma[j * d + j] = *s;
        }
        Self::new(d, Drift::Constant(drift), sigma)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn drift(&self) -> &Drift {
        &self.drift
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// True when `μ` does not depend on the state, so that `X_t` is Gaussian
    /// with an explicit law.
    pub fn is_additive(&self) -> bool {
        matches!(self.drift, Drift::Constant(_))
    }

    pub fn drift_at(&self, x: &[f64], out: &mut [f64]) {
        match &self.drift {
            Drift::Constant(b) => out.copy_from_slice(b),
            Drift::Linear(a) => {
                let d = self.dim;
                for r in 0..d {
                    out[r] = (0..d).map(|c| a[r * d + c] * x[c]).sum();
                }
            }
        }
    }

    /// `σ w`.
    pub fn diffuse(&self, w: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for r in 0..d {
            out[r] = (0..d).map(|c| self.sigma[r * d + c] * w[c]).sum();
        }
    }

    /// `σσᵀ`, row-major.
    pub fn covariance(&self) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for r in 0..d {
            for c in 0..d {
                out[r * d + c] = (0..d).map(|k| self.sigma[r * d + k] * self.sigma[c * d + k]).sum();
            }
        }
        out
    }

    /// One Euler step in place: `x ← x + μ(x)h + σ Δw`.
    fn euler(&self, x: &mut [f64], h: f64, dw: &[f64], scratch: &mut [f64]) {
        let d = self.dim;
        self.drift_at(x, &mut scratch[..d]);
        for j in 0..d {
            x[j] += scratch[j] * h;
        }
        self.diffuse(dw, &mut scratch[..d]);
        for j in 0..d {
            x[j] += scratch[j];
        }
    }
}

/// Simulated trajectories: states `B × (N+1) × d`, increments `B × N × d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    batch: usize,
    steps: usize,
    dim: usize,
    states: Vec<f64>,
    increments: Vec<f64>,
}

impl PathBatch {
    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `X_{t_i}` of trajectory `b`.
    pub fn state(&self, b: usize, i: usize) -> &[f64] {
        let off = (b * (self.steps + 1) + i) * self.dim;
        &self.states[off..off + self.dim]
    }

    /// `ΔW_{t_i}` of trajectory `b`.
    pub fn increment(&self, b: usize, i: usize) -> &[f64] {
        let off = (b * self.steps + i) * self.dim;
        &self.increments[off..off + self.dim]
    }
}

/// Euler–Maruyama paths from `x0`. Trajectory `b` draws from stream `b` of
/// `key`, so every path is reproducible independently of the batch size.
pub fn simulate_paths(
    dynamics: &Dynamics,
    x0: &[f64],
    grid: &TimeGrid,
    batch: usize,
    key: StreamKey,
) -> Result<PathBatch> {
    let d = dynamics.dim();
    if x0.len() != d {
        return Err(Error::Shape {
            expected: d,
            actual: x0.len(),
        });
    }
    let n = grid.steps();
    let mut states = vec![0.0; batch * (n + 1) * d];
    let mut increments = vec![0.0; batch * n * d];
    let mut scratch = vec![0.0; d];
    for b in 0..batch {
        let mut stream = key.stream(b as u64);
        let mut x = x0.to_vec();
        let base = b * (n + 1) * d;
        states[base..base + d].copy_from_slice(&x);
        for i in 0..n {
            let sd = grid.dt(i).sqrt();
            let dw = &mut increments[(b * n + i) * d..(b * n + i + 1) * d];
            for w in dw.iter_mut() {
                *w = sd * stream.normal();
            }
            dynamics.euler(&mut x, grid.dt(i), dw, &mut scratch);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::SimulationBlowup { step: i + 1 });
            }
            let off = base + (i + 1) * d;
            states[off..off + d].copy_from_slice(&x);
        }
    }
    Ok(PathBatch {
        batch,
        steps: n,
        dim: d,
        states,
        increments,
    })
}

/// Training samples for one grid interval: `(X_{t_i}, ΔW_{t_i}, X_{t_{i+1}})`,
/// each stored row-major `B × d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub dim: usize,
    pub x: Vec<f64>,
    pub dw: Vec<f64>,
    pub x_next: Vec<f64>,
}

impl Transition {
    pub fn len(&self) -> usize {
        self.x.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Samples the Euler chain on the interval `[t_i, t_{i+1}]`.
///
/// Additive dynamics draw `X_{t_i} = x0 + μ t_i + σ W_{t_i}` directly, which
/// has exactly the law of the Euler chain; otherwise the chain is simulated
/// from the origin.
pub fn sample_transition(
    dynamics: &Dynamics,
    x0: &[f64],
    grid: &TimeGrid,
    i: usize,
    batch: usize,
    key: StreamKey,
) -> Result<Transition> {
    let d = dynamics.dim();
    let mut x = vec![0.0; batch * d];
    let mut dw = vec![0.0; batch * d];
    let mut x_next = vec![0.0; batch * d];
    let mut scratch = vec![0.0; d];
    let mut noise = vec![0.0; d];
    let h = grid.dt(i);
    for b in 0..batch {
        let mut stream = key.stream(b as u64);
        let xb = &mut x[b * d..(b + 1) * d];
        xb.copy_from_slice(x0);
        if dynamics.is_additive() {
            let t = grid.time(i);
            if t > 0.0 {
                for w in noise.iter_mut() {
                    *w = t.sqrt() * stream.normal();
                }
                dynamics.euler(xb, t, &noise, &mut scratch);
            }
        } else {
            for k in 0..i {
                let sd = grid.dt(k).sqrt();
                for w in noise.iter_mut() {
                    *w = sd * stream.normal();
                }
                dynamics.euler(xb, grid.dt(k), &noise, &mut scratch);
            }
        }
        let dwb = &mut dw[b * d..(b + 1) * d];
        for w in dwb.iter_mut() {
            *w = h.sqrt() * stream.normal();
        }
        let xn = &mut x_next[b * d..(b + 1) * d];
        xn.copy_from_slice(xb);
        dynamics.euler(xn, h, dwb, &mut scratch);
        if xn.iter().any(|v| !v.is_finite()) {
            return Err(Error::SimulationBlowup { step: i + 1 });
        }
    }
    Ok(Transition { dim: d, x, dw, x_next })
}
