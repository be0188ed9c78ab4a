//! Matrix Riccati equation of the linear-quadratic problem
//!
//! ```text
//! K̇ + AᵀK + KA + Q − K B Bᵀ K / (N + DᵀKD) = 0,   K(T) = P
//! ```
//!
//! integrated backward by classical RK4.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::linalg::{frobenius, symmetrize};
use crate::problem::Jet;
use crate::{Error, Result};

/// Mesh used unless the caller chooses one.
pub const DEFAULT_MESH: usize = 10_000;

/// Largest tolerated change of `K(0)` between the mesh and its half.
pub const RICHARDSON_LIMIT: f64 = 1e-7;

/// Coefficients of the linear-quadratic problem with a scalar control.
#[derive(Debug, Clone, PartialEq)]
pub struct LqParams {
    pub dim: usize,
    /// `d × d`, row-major.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub n: f64,
    pub maturity: f64,
}

impl LqParams {
    /// `A = I`, `B = D = 1_d`, `Q = P = I/d`, `N = d`.
    pub fn defaults(dim: usize, maturity: f64) -> Self {
        let mut eye = vec![0.0; dim * dim];
        let mut scaled = vec![0.0; dim * dim];
        for j in 0..dim {
            eye[j * dim + j] = 1.0;
            scaled[j * dim + j] = 1.0 / dim as f64;
        }
        Self {
            dim,
            a: eye,
            b: vec![1.0; dim],
            d: vec![1.0; dim],
            q: scaled.clone(),
            p: scaled,
            n: dim as f64,
            maturity,
        }
    }

    /// `dK/dτ` in reversed time `τ = T − t`, i.e. `−K̇`.
    fn rhs(&self, k: &[f64], out: &mut [f64]) {
        let d = self.dim;
        let kb: Vec<f64> = (0..d).map(|r| (0..d).map(|c| k[r * d + c] * self.b[c]).sum()).collect();
        let kd: f64 = (0..d)
            .map(|r| self.d[r] * (0..d).map(|c| k[r * d + c] * self.d[c]).sum::<f64>())
            .sum();
        let den = self.n + kd;
        for r in 0..d {
            for c in 0..d {
                let mut v = self.q[r * d + c];
                for m in 0..d {
                    v += self.a[m * d + r] * k[m * d + c] + k[r * d + m] * self.a[m * d + c];
                }
                v -= kb[r] * kb[c] / den;
                out[r * d + c] = v;
            }
        }
    }
}

/// `K` on a uniform mesh of `[0, T]`, interpolated by cubic Hermite splines
/// using the ODE for the node derivatives.
#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    params: LqParams,
    mesh: usize,
    // k[j] is K(t_j), t_j = j T / mesh
    k: Vec<Vec<f64>>,
}

impl RiccatiSolution {
    /// Integrates on `mesh` steps and checks the result against a run on
    /// `mesh / 2` steps.
    pub fn solve(params: LqParams, mesh: usize) -> Result<Self> {
        if params.n <= 0.0 {
            return Err(Error::Config("the control cost must be positive".into()));
        }
        let dd = params.dim * params.dim;
        for len in [params.a.len(), params.q.len(), params.p.len()] {
            if len != dd {
                return Err(Error::Shape {
                    expected: dd,
                    actual: len,
                });
            }
        }
        if params.b.len() != params.dim || params.d.len() != params.dim {
            return Err(Error::Shape {
                expected: params.dim,
                actual: params.b.len().min(params.d.len()),
            });
        }
        let mesh = mesh.max(2);
        let k = integrate(&params, mesh);
        let coarse = integrate(&params, mesh / 2);
        let diff: Vec<f64> = k[0].iter().zip(&coarse[0]).map(|(a, b)| a - b).collect();
        let gap = frobenius(&diff);
        if !(gap <= RICHARDSON_LIMIT) {
            return Err(Error::CoarseMesh(gap));
        }
        Ok(Self { params, mesh, k })
    }

    pub fn params(&self) -> &LqParams {
        &self.params
    }

    pub fn mesh(&self) -> usize {
        self.mesh
    }

    /// Frobenius change of `K(0)` when the mesh is halved.
    pub fn richardson_gap(&self) -> f64 {
        let coarse = integrate(&self.params, self.mesh / 2);
        let diff: Vec<f64> = self.k[0].iter().zip(&coarse[0]).map(|(a, b)| a - b).collect();
        frobenius(&diff)
    }

    /// Nodal values `K(t_j)`.
    pub fn node(&self, j: usize) -> &[f64] {
        &self.k[j]
    }

    /// `(K(t), K̇(t))`.
    pub fn eval(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let dd = self.params.dim * self.params.dim;
        let big_t = self.params.maturity;
        let h = big_t / self.mesh as f64;
        let t = t.max(0.0).min(big_t);
        let j = ((t / h) as usize).min(self.mesh - 1);
        let s = (t - j as f64 * h) / h;
        let mut m0 = vec![0.0; dd];
        let mut m1 = vec![0.0; dd];
        self.params.rhs(&self.k[j], &mut m0);
        self.params.rhs(&self.k[j + 1], &mut m1);
        // node derivatives K̇ = −rhs
        let (h00, h10, h01, h11) = (
            2.0 * s.powi(3) - 3.0 * s * s + 1.0,
            s.powi(3) - 2.0 * s * s + s,
            -2.0 * s.powi(3) + 3.0 * s * s,
            s.powi(3) - s * s,
        );
        let (d00, d10, d01, d11) = (
            6.0 * s * s - 6.0 * s,
            3.0 * s * s - 4.0 * s + 1.0,
            -6.0 * s * s + 6.0 * s,
            3.0 * s * s - 2.0 * s,
        );
        let mut k = vec![0.0; dd];
        let mut kdot = vec![0.0; dd];
        for e in 0..dd {
            let (p0, p1) = (self.k[j][e], self.k[j + 1][e]);
            let (v0, v1) = (-m0[e], -m1[e]);
            k[e] = h00 * p0 + h10 * h * v0 + h01 * p1 + h11 * h * v1;
            kdot[e] = (d00 * p0 + d01 * p1) / h + d10 * v0 + d11 * v1;
        }
        (k, kdot)
    }

    /// Riccati residual `K̇ + rhs` with `K`, `K̇` from the interpolant.
    pub fn residual(&self, t: f64) -> f64 {
        let (k, kdot) = self.eval(t);
        let mut r = vec![0.0; k.len()];
        self.params.rhs(&k, &mut r);
        let diff: Vec<f64> = kdot.iter().zip(&r).map(|(a, b)| a + b).collect();
        frobenius(&diff)
    }

    /// `u = xᵀKx`, `z = 2Kx`, `γ = 2K`.
    pub fn exact(&self, t: f64, x: &[f64]) -> Jet {
        let d = self.params.dim;
        let (k, kdot) = self.eval(t);
        let quad = |m: &[f64]| -> f64 {
            (0..d)
                .map(|r| x[r] * (0..d).map(|c| m[r * d + c] * x[c]).sum::<f64>())
                .sum()
        };
        let gradient = (0..d)
            .map(|r| 2.0 * (0..d).map(|c| k[r * d + c] * x[c]).sum::<f64>())
            .collect();
        Jet {
            value: quad(&k),
            time_derivative: quad(&kdot),
            gradient,
            hessian: k.iter().map(|v| 2.0 * v).collect(),
        }
    }
}

fn integrate(params: &LqParams, mesh: usize) -> Vec<Vec<f64>> {
    let d = params.dim;
    let dd = d * d;
    let h = params.maturity / mesh as f64;
    let mut out = vec![Vec::new(); mesh + 1];
    let mut k = params.p.clone();
    symmetrize(&mut k, d);
    out[mesh] = k.clone();
    let mut k1 = vec![0.0; dd];
    let mut k2 = vec![0.0; dd];
    let mut k3 = vec![0.0; dd];
    let mut k4 = vec![0.0; dd];
    let mut tmp = vec![0.0; dd];
    for j in (0..mesh).rev() {
        params.rhs(&k, &mut k1);
        for e in 0..dd {
            tmp[e] = k[e] + 0.5 * h * k1[e];
        }
        params.rhs(&tmp, &mut k2);
        for e in 0..dd {
            tmp[e] = k[e] + 0.5 * h * k2[e];
        }
        params.rhs(&tmp, &mut k3);
        for e in 0..dd {
            tmp[e] = k[e] + h * k3[e];
        }
        params.rhs(&tmp, &mut k4);
        for e in 0..dd {
            k[e] += h / 6.0 * (k1[e] + 2.0 * k2[e] + 2.0 * k3[e] + k4[e]);
        }
        symmetrize(&mut k, d);
        out[j] = k.clone();
    }
    out
}
