//! Closed-form solutions.

use alloc::vec;

use num_traits::Float;

use crate::problem::Jet;

/// `u = tanh(s) e^{(T−t)/2}`, `s = Σxᵢ/√d`.
pub fn case1_exact(t: f64, x: &[f64], maturity: f64) -> Jet {
    let d = x.len();
    let rd = (d as f64).sqrt();
    let s = x.iter().sum::<f64>() / rd;
    let th = s.tanh();
    let e = ((maturity - t) / 2.0).exp();
    let u = th * e;
    let slope = (1.0 - th * th) * e / rd;
    let curv = -2.0 * th * (1.0 - th * th) * e / d as f64;
    Jet {
        value: u,
        time_derivative: -0.5 * u,
        gradient: vec![slope; d],
        hessian: vec![curv; d * d],
    }
}

/// `u = −e^{−(T−t)λ²/2} e^{−ηx}`.
pub fn merton_exact(t: f64, x: f64, lambda: f64, eta: f64, maturity: f64) -> Jet {
    let u = -(-(maturity - t) * lambda * lambda / 2.0 - eta * x).exp();
    Jet {
        value: u,
        time_derivative: lambda * lambda / 2.0 * u,
        gradient: vec![-eta * u],
        hessian: vec![eta * eta * u],
    }
}

/// `u = cos(Σxᵢ/√d) + T − t`.
pub fn monge_ampere_exact(t: f64, x: &[f64], maturity: f64) -> Jet {
    let d = x.len();
    let rd = (d as f64).sqrt();
    let s = x.iter().sum::<f64>() / rd;
    Jet {
        value: s.cos() + maturity - t,
        time_derivative: -1.0,
        gradient: vec![-s.sin() / rd; d],
        hessian: vec![-s.cos() / d as f64; d * d],
    }
}
