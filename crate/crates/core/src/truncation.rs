//! Componentwise clamps of simulated states to a quantile band around the
//! deterministic mean path.

use alloc::vec::Vec;

use num_traits::Float;

use crate::sde::{Drift, Dynamics};
use crate::special::inverse_normal_cdf;
use crate::{Error, Result};

/// Shape of the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationKind {
    /// `x0 ± s √t φ_p`.
    Static,
    /// `x0 + μ t ± s √t φ_p`.
    Drifted,
    /// `x0 e^{a t} ± s √((e^{2at} − 1)/(2a)) φ_p`, `a` the diagonal of the
    /// linear drift.
    OuExponential,
}

/// Band `[lo(t), hi(t)]` per coordinate. `s_j = √(σσᵀ)_jj`.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    kind: TruncationKind,
    phi: f64,
    x0: Vec<f64>,
    rate: Vec<f64>,
    scale: Vec<f64>,
}

impl Truncation {
    pub fn new(kind: TruncationKind, p: f64, dynamics: &Dynamics, x0: &[f64]) -> Result<Self> {
        let d = dynamics.dim();
        if x0.len() != d {
            return Err(Error::Shape {
                expected: d,
                actual: x0.len(),
            });
        }
        let phi = inverse_normal_cdf(p)?;
        let cov = dynamics.covariance();
        let scale = (0..d).map(|j| cov[j * d + j].sqrt()).collect();
        let rate = match (kind, dynamics.drift()) {
            (TruncationKind::Static, _) => alloc::vec![0.0; d],
            (TruncationKind::Drifted, Drift::Constant(b)) => b.clone(),
            (TruncationKind::OuExponential, Drift::Linear(a)) => (0..d).map(|j| a[j * d + j]).collect(),
            _ => {
                return Err(Error::Config(
                    "truncation variant does not match the training drift".into(),
                ))
            }
        };
        Ok(Self {
            kind,
            phi,
            x0: x0.to_vec(),
            rate,
            scale,
        })
    }

    pub fn kind(&self) -> TruncationKind {
        self.kind
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `(lo, hi)` for coordinate `j` at time `t`.
    pub fn band(&self, j: usize, t: f64) -> (f64, f64) {
        let t = t.max(0.0);
        let (center, width) = match self.kind {
            TruncationKind::Static => (self.x0[j], t.sqrt()),
            TruncationKind::Drifted => (self.x0[j] + self.rate[j] * t, t.sqrt()),
            TruncationKind::OuExponential => {
                let a = self.rate[j];
                let var = if a.abs() < 1e-12 {
                    t
                } else {
                    ((2.0 * a * t).exp() - 1.0) / (2.0 * a)
                };
                (self.x0[j] * (a * t).exp(), var.sqrt())
            }
        };
        let half = self.scale[j] * width * self.phi;
        (center - half, center + half)
    }

    /// Clamps `x` in place.
    pub fn apply(&self, t: f64, x: &mut [f64]) {
        for (j, v) in x.iter_mut().enumerate() {
            let (lo, hi) = self.band(j, t);
            *v = v.max(lo).min(hi);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn static_band_interior_and_origin() {
        let dynamics = Dynamics::diagonal(vec![0.0], &[1.5]).unwrap();
        let tr = Truncation::new(TruncationKind::Static, 0.999, &dynamics, &[0.5]).unwrap();
        let mut x = [0.7];
        tr.apply(0.5, &mut x);
        assert_eq!(x, [0.7]);
        let mut x = [100.0];
        tr.apply(0.0, &mut x);
        assert_eq!(x, [0.5]);
    }

    #[test]
    fn ou_band_upper_edge() {
        let dynamics = Dynamics::new(1, Drift::Linear(vec![1.0]), vec![1.0]).unwrap();
        let tr = Truncation::new(TruncationKind::OuExponential, 0.999, &dynamics, &[1.0]).unwrap();
        let e = core::f64::consts::E;
        let edge = e + ((e * e - 1.0) / 2.0).sqrt() * 3.090232306167813;
        let mut x = [10.0];
        tr.apply(1.0, &mut x);
        assert!((x[0] - edge).abs() < 1e-9);
        assert!((x[0] - 8.2416).abs() < 1e-3);
    }

    #[test]
    fn drifted_band_moves_with_mean() {
        let dynamics = Dynamics::diagonal(vec![0.6], &[1.0]).unwrap();
        let tr = Truncation::new(TruncationKind::Drifted, 0.98, &dynamics, &[1.0]).unwrap();
        let (lo, hi) = tr.band(0, 0.04);
        assert!(((lo + hi) / 2.0 - 1.024).abs() < 1e-12);
    }

    #[test]
    fn mismatched_variant_is_rejected() {
        let dynamics = Dynamics::diagonal(vec![0.0], &[1.0]).unwrap();
        assert!(Truncation::new(TruncationKind::OuExponential, 0.9, &dynamics, &[0.0]).is_err());
        assert!(Truncation::new(TruncationKind::Static, 1.0, &dynamics, &[0.0]).is_err());
    }
}
