//! Monte Carlo estimate of `w(t, v) = E[exp(−½∫ₜᵀ R(V_s) ds)]` for
//! independent Ornstein–Uhlenbeck factors, `R(v) = Σ λᵢ² vᵢ²`.

use num_traits::Float;

use super::scott::FactorParams;
use crate::rng::StreamKey;

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Substeps of the time discretization of the integral.
pub const SUBSTEPS: usize = 1000;

/// Factors are advanced with the exact Gaussian transition of the OU process
/// and `∫R` is approximated by the trapezoidal rule on `SUBSTEPS` intervals.
/// Correlations are ignored: the estimate targets the uncorrelated case.
pub fn mc_w_estimate(
    t: f64,
    v: &[f64],
    factors: &[FactorParams],
    maturity: f64,
    samples: usize,
    key: StreamKey,
) -> McEstimate {
    let h = (maturity - t).max(0.0) / SUBSTEPS as f64;
    let decay: alloc::vec::Vec<(f64, f64)> = factors
        .iter()
        .map(|f| {
            let e = (-f.kappa * h).exp();
            let sd = if f.kappa > 0.0 {
                f.nu * ((1.0 - e * e) / (2.0 * f.kappa)).sqrt()
            } else {
                f.nu * h.sqrt()
            };
            (e, sd)
        })
        .collect();
    let rate = |state: &[f64]| -> f64 {
        state
            .iter()
            .zip(factors)
            .map(|(x, f)| f.lambda * f.lambda * x * x)
            .sum()
    };
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut state = alloc::vec![0.0; v.len()];
    for s in 0..samples {
        let mut stream = key.stream(s as u64);
        state.copy_from_slice(v);
        let mut prev = rate(&state);
        let mut integral = 0.0;
        for _ in 0..SUBSTEPS {
            for (j, f) in factors.iter().enumerate() {
                let (e, sd) = decay[j];
                state[j] = f.theta + (state[j] - f.theta) * e + sd * stream.normal();
            }
            let next = rate(&state);
            integral += 0.5 * h * (prev + next);
            prev = next;
        }
        let sample = (-0.5 * integral).exp();
        let delta = sample - mean;
        mean += delta / (s + 1) as f64;
        m2 += delta * (sample - mean);
    }
    let n = samples as f64;
    let var = if samples > 1 { m2 / (n - 1.0) } else { 0.0 };
    McEstimate {
        estimate: mean,
        std_error: (var / n).sqrt(),
    }
}
