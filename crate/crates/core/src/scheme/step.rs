use crate::linalg::{dot, trace_product};
use crate::problem::{Clamps, GenArgs, Problem};

/// `f̃ = f − μ·z − ½ tr(σσᵀγ)`.
pub fn f_tilde(problem: &dyn Problem, t: f64, x: &[f64], y: f64, z: &[f64], gamma: &[f64], clamps: &Clamps) -> f64 {
    let d = problem.dim();
    let dynamics = problem.dynamics();
    let mut mu = alloc::vec![0.0; d];
    dynamics.drift_at(x, &mut mu);
    let f = problem.generator(&GenArgs { t, x, y, z, gamma }, clamps);
    f - dot(&mu, z) - 0.5 * trace_product(&dynamics.covariance(), gamma, d)
}

/// One forward step `F = y − f̃ h + zᵀσΔw`.
#[allow(clippy::too_many_arguments)]
pub fn step_map(
    problem: &dyn Problem,
    t: f64,
    x: &[f64],
    y: f64,
    z: &[f64],
    gamma: &[f64],
    h: f64,
    dw: &[f64],
    clamps: &Clamps,
) -> f64 {
    let d = problem.dim();
    let mut sdw = alloc::vec![0.0; d];
    problem.dynamics().diffuse(dw, &mut sdw);
    y - f_tilde(problem, t, x, y, z, gamma, clamps) * h + dot(z, &sdw)
}
