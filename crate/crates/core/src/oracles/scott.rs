//! Exponential-utility value function under Scott-type stochastic volatility.
//!
//! With `u = −e^{−ηx} exp(−Σᵢ qᵢ(t, vᵢ))` and
//! `qᵢ = φᵢ vᵢ²/2 + ψᵢ vᵢ + χᵢ`, the Bellman equation splits into independent
//! per-factor systems
//!
//! ```text
//! φ̇ = 2κ̄φ + aφ² − λ²
//! ψ̇ = (κ̄ + aφ)ψ − κθφ
//! χ̇ = −κθψ + ½ν²((1 − ρ²)ψ² − φ)
//! ```
//!
//! with `κ̄ = κ + ρνλ`, `a = ν²(1 − ρ²)` and zero terminal values. `φ` and `ψ`
//! have hyperbolic closed forms; `χ` is integrated by Gauss–Legendre
//! quadrature.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::quadrature::Composite;
use crate::problem::Jet;

/// Parameters of one volatility factor `dV = κ(θ − V)dt + ν dB`, with risk
/// premium `λ v` and correlation `ρ` between `B` and the asset noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorParams {
    pub kappa: f64,
    pub theta: f64,
    pub nu: f64,
    pub lambda: f64,
    pub rho: f64,
}

/// `(φ, ψ, χ)` and their time derivatives at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub phi: f64,
    pub psi: f64,
    pub chi: f64,
    pub phi_dot: f64,
    pub psi_dot: f64,
    pub chi_dot: f64,
}

impl FactorParams {
    pub fn kappa_bar(&self) -> f64 {
        self.kappa + self.rho * self.nu * self.lambda
    }

    pub fn kappa_hat(&self) -> f64 {
        let (k, n, l, r) = (self.kappa, self.nu, self.lambda, self.rho);
        (k * k + 2.0 * r * n * l * k + n * n * l * l).sqrt()
    }

    fn a(&self) -> f64 {
        self.nu * self.nu * (1.0 - self.rho * self.rho)
    }

    /// `φ` at time-to-maturity `tau`.
    pub fn phi(&self, tau: f64) -> f64 {
        let kh = self.kappa_hat();
        let (s, c) = ((kh * tau).sinh(), (kh * tau).cosh());
        self.lambda * self.lambda * s / (kh * c + self.kappa_bar() * s)
    }

    /// `ψ` at time-to-maturity `tau`.
    pub fn psi(&self, tau: f64) -> f64 {
        let kh = self.kappa_hat();
        let (s, c) = ((kh * tau).sinh(), (kh * tau).cosh());
        let l2 = self.lambda * self.lambda;
        l2 * self.kappa * self.theta / kh * (c - 1.0) / (kh * c + self.kappa_bar() * s)
    }

    fn chi_integrand(&self, tau: f64) -> f64 {
        let (phi, psi) = (self.phi(tau), self.psi(tau));
        self.kappa * self.theta * psi - 0.5 * self.a() * psi * psi + 0.5 * self.nu * self.nu * phi
    }

    /// Right-hand sides of the ODE system in forward time.
    pub fn derivatives(&self, phi: f64, psi: f64) -> (f64, f64, f64) {
        let (kb, a, kt) = (self.kappa_bar(), self.a(), self.kappa * self.theta);
        let phi_dot = 2.0 * kb * phi + a * phi * phi - self.lambda * self.lambda;
        let psi_dot = (kb + a * phi) * psi - kt * phi;
        let chi_dot = -kt * psi + 0.5 * self.nu * self.nu * ((1.0 - self.rho * self.rho) * psi * psi - phi);
        (phi_dot, psi_dot, chi_dot)
    }
}

/// Value function for `n` factors and utility `−e^{−ηx}`.
#[derive(Debug, Clone)]
pub struct ScottSolution {
    pub eta: f64,
    pub maturity: f64,
    pub factors: Vec<FactorParams>,
    quadrature: Composite,
}

impl ScottSolution {
    pub fn new(eta: f64, maturity: f64, factors: Vec<FactorParams>) -> Self {
        Self {
            eta,
            maturity,
            factors,
            quadrature: Composite::new(12, 16),
        }
    }

    /// Coefficients of factor `i` at time `t`.
    pub fn coefficients(&self, i: usize, t: f64) -> Coefficients {
        let f = &self.factors[i];
        let tau = (self.maturity - t).max(0.0);
        let phi = f.phi(tau);
        let psi = f.psi(tau);
        let chi = if tau > 0.0 {
            self.quadrature.integrate(0.0, tau, |s| f.chi_integrand(s))
        } else {
            0.0
        };
        let (phi_dot, psi_dot, chi_dot) = f.derivatives(phi, psi);
        Coefficients {
            phi,
            psi,
            chi,
            phi_dot,
            psi_dot,
            chi_dot,
        }
    }

    /// `w(t, v) = exp(−Σ qᵢ)`, the factor part of `u = U(x) w`.
    pub fn w(&self, t: f64, v: &[f64]) -> f64 {
        let mut q = 0.0;
        for (i, vi) in v.iter().enumerate() {
            let c = self.coefficients(i, t);
            q += c.phi * vi * vi / 2.0 + c.psi * vi + c.chi;
        }
        (-q).exp()
    }

    /// Solution jet at `(t, (x, v))`.
    pub fn exact(&self, t: f64, state: &[f64]) -> Jet {
        let n = self.factors.len();
        let d = n + 1;
        let (x, v) = (state[0], &state[1..]);
        let mut q = 0.0;
        let mut q_t = 0.0;
        let mut slope = vec![0.0; n];
        let mut curv = vec![0.0; n];
        for i in 0..n {
            let c = self.coefficients(i, t);
            let vi = v[i];
            q += c.phi * vi * vi / 2.0 + c.psi * vi + c.chi;
            q_t += c.phi_dot * vi * vi / 2.0 + c.psi_dot * vi + c.chi_dot;
            slope[i] = c.phi * vi + c.psi;
            curv[i] = c.phi;
        }
        let eta = self.eta;
        let u = -(-eta * x - q).exp();
        let mut gradient = vec![0.0; d];
        let mut hessian = vec![0.0; d * d];
        gradient[0] = -eta * u;
        hessian[0] = eta * eta * u;
        for i in 0..n {
            gradient[i + 1] = -slope[i] * u;
            hessian[i + 1] = eta * slope[i] * u;
            hessian[(i + 1) * d] = eta * slope[i] * u;
            for j in 0..n {
                let delta = if i == j { curv[i] } else { 0.0 };
                hessian[(i + 1) * d + j + 1] = (slope[i] * slope[j] - delta) * u;
            }
        }
        Jet {
            value: u,
            time_derivative: -q_t * u,
            gradient,
            hessian,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factor() -> FactorParams {
        FactorParams {
            kappa: 1.0,
            theta: 0.4,
            nu: 0.4,
            lambda: 1.5,
            rho: -0.7,
        }
    }

    #[test]
    fn terminal_values_vanish() {
        let sol = ScottSolution::new(0.5, 1.0, vec![factor()]);
        let c = sol.coefficients(0, 1.0);
        assert_eq!((c.phi, c.psi, c.chi), (0.0, 0.0, 0.0));
        assert_eq!(sol.w(1.0, &[0.3]), 1.0);
    }

    #[test]
    fn phi_is_nonnegative() {
        let sol = ScottSolution::new(0.5, 1.0, vec![factor()]);
        for k in 0..=20 {
            assert!(sol.coefficients(0, k as f64 / 20.0).phi >= 0.0);
        }
    }
}
