//! Gaussian distribution functions.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use num_traits::Float;

use crate::{Error, Result};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

// Rational approximation of the lower half (Acklam), relative error ~1e-9
// before refinement.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.024_25;

/// Quantile of the standard normal distribution, `Φ⁻¹(p)` for `0 < p < 1`.
///
/// Rational approximation followed by one Halley step on the erfc-based CDF.
/// The upper half is obtained by symmetry so the refinement always works with
/// the smaller tail probability.
pub fn inverse_normal_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain("inverse_normal_cdf"));
    }
    Ok(if p > 0.5 {
        -lower_quantile(1.0 - p)
    } else {
        lower_quantile(p)
    })
}

fn lower_quantile(p: f64) -> f64 {
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent bisection on the CDF.
    fn bisect(p: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0, 40.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn median_is_zero() {
        assert_eq!(inverse_normal_cdf(0.5).unwrap(), 0.0);
    }

    #[test]
    fn known_quantiles() {
        // bisection values: 1.959963984540054, 3.090232306167813
        assert!((bisect(0.975) - 1.959964).abs() < 5e-7);
        assert!((bisect(0.999) - 3.090232).abs() < 5e-7);
        assert!((inverse_normal_cdf(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((inverse_normal_cdf(0.999).unwrap() - 3.090_232_306_167_813).abs() < 1e-12);
    }

    #[test]
    fn round_trip_on_grid() {
        for k in 1..1000 {
            let p = k as f64 / 1000.0;
            let x = inverse_normal_cdf(p).unwrap();
            assert!((normal_cdf(x) - p).abs() < 1e-9, "p = {p}");
        }
        for &p in &[1e-12, 1e-6, 0.01, 0.02425, 0.97575, 1.0 - 1e-9] {
            let x = inverse_normal_cdf(p).unwrap();
            assert!((x - bisect(p)).abs() < 1e-8, "p = {p}");
        }
    }

    #[test]
    fn rejects_outside_unit_interval() {
        for &p in &[0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert_eq!(inverse_normal_cdf(p), Err(Error::Domain("inverse_normal_cdf")));
        }
    }
}
