use dbs_core::oracles::mc::mc_w_estimate;
use dbs_core::oracles::riccati::{LqParams, RiccatiSolution, DEFAULT_MESH};
use dbs_core::oracles::scott::{FactorParams, ScottSolution};
use dbs_core::problem::{residual, GenArgs, GeneratorGrad};
use dbs_core::problems::portfolio::ParameterSet;
use dbs_core::rng::{Purpose, Stream, StreamKey};
use dbs_core::{build_problem, Clamps, Problem, ProblemOptions};

fn rng(seed: u64) -> Stream {
    StreamKey::new(seed, Purpose::Auxiliary, 0, 0).stream(0)
}

fn opts(dim: Option<usize>) -> ProblemOptions {
    ProblemOptions {
        dim,
        ..Default::default()
    }
}

/// Every problem with a reference solution, with the dimensions exercised.
fn oracle_problems() -> Vec<Box<dyn Problem>> {
    let mut out = Vec::new();
    for (name, dim) in [
        ("case1", Some(1)),
        ("case1", Some(4)),
        ("lq", Some(1)),
        ("lq", Some(3)),
        ("monge-ampere", Some(5)),
        ("monge-ampere", Some(2)),
        ("merton", None),
        ("one-asset-scott", None),
        ("no-leverage-scott1", None),
        ("no-leverage-scott4", None),
        ("no-leverage-scott7", None),
        ("no-leverage-scott9", None),
    ] {
        out.push(build_problem(name, &opts(dim)).unwrap());
    }
    out
}

/// A point near the initial state, at a time in `[0, 0.95 T]`.
fn sample_point(p: &dyn Problem, s: &mut Stream) -> (f64, Vec<f64>) {
    let t = 0.95 * p.maturity() * s.uniform();
    let x = p
        .initial_state()
        .iter()
        .map(|x0| x0 + 0.5 * (2.0 * s.uniform() - 1.0))
        .collect();
    (t, x)
}

#[test]
fn oracle_jets_solve_their_equations() {
    let mut s = rng(1);
    for p in oracle_problems() {
        for _ in 0..100 {
            let (t, x) = sample_point(p.as_ref(), &mut s);
            let jet = p.exact(t, &x).unwrap();
            let r = residual(p.as_ref(), t, &x, &jet);
            assert!(
                r.abs() < 1e-8,
                "{} (d={}) at t={t}, x={x:?}: residual {r:e}",
                p.name(),
                p.dim()
            );
        }
    }
}

#[test]
fn oracle_derivatives_match_finite_differences() {
    let mut s = rng(2);
    let h = 1e-5;
    for p in oracle_problems() {
        let d = p.dim();
        for _ in 0..20 {
            let (t, x) = sample_point(p.as_ref(), &mut s);
            let jet = p.exact(t, &x).unwrap();
            let value = |t: f64, x: &[f64]| p.exact(t, x).unwrap();
            let ut = (value(t + h, &x).value - value(t - h, &x).value) / (2.0 * h);
            assert!(
                (ut - jet.time_derivative).abs() < 1e-7 * (1.0 + ut.abs()),
                "{} u_t",
                p.name()
            );
            for k in 0..d {
                let mut up = x.clone();
                let mut dn = x.clone();
                up[k] += h;
                dn[k] -= h;
                let (ju, jd) = (value(t, &up), value(t, &dn));
                let gk = (ju.value - jd.value) / (2.0 * h);
                assert!(
                    (gk - jet.gradient[k]).abs() < 1e-7 * (1.0 + gk.abs()),
                    "{} z_{k}",
                    p.name()
                );
                for j in 0..d {
                    let hjk = (ju.gradient[j] - jd.gradient[j]) / (2.0 * h);
                    let exact = jet.hessian[j * d + k];
                    assert!((hjk - exact).abs() < 1e-7 * (1.0 + hjk.abs()), "{} γ_{j}{k}", p.name());
                }
            }
        }
    }
}

#[test]
fn terminal_gradients_match_finite_differences() {
    let mut s = rng(3);
    let h = 1e-6;
    for p in oracle_problems() {
        let d = p.dim();
        let mut grad = vec![0.0; d];
        for _ in 0..100 {
            let (_, x) = sample_point(p.as_ref(), &mut s);
            p.terminal_grad(&x, &mut grad);
            for k in 0..d {
                let mut up = x.clone();
                let mut dn = x.clone();
                up[k] += h;
                dn[k] -= h;
                let fd = (p.terminal(&up) - p.terminal(&dn)) / (2.0 * h);
                let err = (fd - grad[k]).abs() / fd.abs().max(grad[k].abs()).max(1e-3);
                assert!(err < 1e-6, "{} Dg_{k}: {} vs {fd}", p.name(), grad[k]);
            }
        }
    }
}

#[test]
fn generator_gradients_match_finite_differences() {
    let mut s = rng(4);
    let h = 1e-6;
    let clamps = Clamps::new();
    for p in oracle_problems() {
        let d = p.dim();
        let mut gg = GeneratorGrad::new(d);
        for _ in 0..50 {
            let (t, x) = sample_point(p.as_ref(), &mut s);
            // Perturbed exact jets keep the arguments in the region where
            // denominators are bounded away from zero.
            let jet = p.exact(t, &x).unwrap();
            let y = jet.value * (1.0 + 0.1 * (s.uniform() - 0.5));
            let z: Vec<f64> = jet
                .gradient
                .iter()
                .map(|v| v * (1.0 + 0.1 * (s.uniform() - 0.5)))
                .collect();
            let gamma: Vec<f64> = jet
                .hessian
                .iter()
                .map(|v| v * (1.0 + 0.1 * (s.uniform() - 0.5)))
                .collect();
            let f = |y: f64, z: &[f64], gamma: &[f64]| p.generator(&GenArgs { t, x: &x, y, z, gamma }, &clamps);
            let value = p.generator_grad(
                &GenArgs {
                    t,
                    x: &x,
                    y,
                    z: &z,
                    gamma: &gamma,
                },
                &clamps,
                &mut gg,
            );
            assert!((value - f(y, &z, &gamma)).abs() < 1e-14 * (1.0 + value.abs()));
            let check = |fd: f64, exact: f64, what: &str| {
                let err = (fd - exact).abs() / fd.abs().max(exact.abs()).max(1e-2);
                assert!(err < 1e-6, "{} ∂f/∂{what}: {exact} vs {fd}", p.name());
            };
            check((f(y + h, &z, &gamma) - f(y - h, &z, &gamma)) / (2.0 * h), gg.dy, "y");
            for k in 0..d {
                let mut up = z.clone();
                let mut dn = z.clone();
                up[k] += h;
                dn[k] -= h;
                check((f(y, &up, &gamma) - f(y, &dn, &gamma)) / (2.0 * h), gg.dz[k], "z");
            }
            for k in 0..d * d {
                let mut up = gamma.clone();
                let mut dn = gamma.clone();
                up[k] += h;
                dn[k] -= h;
                check((f(y, &z, &up) - f(y, &z, &dn)) / (2.0 * h), gg.dgamma[k], "γ");
            }
        }
    }
}

#[test]
fn riccati_meshes_agree() {
    for dim in [1, 3] {
        let sol = RiccatiSolution::solve(LqParams::defaults(dim, 1.0), DEFAULT_MESH).unwrap();
        assert!(sol.richardson_gap() < 1e-8, "d={dim}: {:e}", sol.richardson_gap());
    }
}

#[test]
fn riccati_solution_invariants() {
    let params = LqParams::defaults(3, 1.0);
    let sol = RiccatiSolution::solve(params.clone(), DEFAULT_MESH).unwrap();
    assert_eq!(sol.node(sol.mesh()), params.p.as_slice());
    let mut s = rng(5);
    for j in (0..=sol.mesh()).step_by(97) {
        let k = sol.node(j);
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(k[a * 3 + b], k[b * 3 + a]);
            }
        }
        // Positive semidefinite: quadratic form on random directions.
        for _ in 0..5 {
            let v: Vec<f64> = (0..3).map(|_| s.normal()).collect();
            let q: f64 = (0..9).map(|i| v[i / 3] * k[i] * v[i % 3]).sum();
            assert!(q >= -1e-12);
        }
    }
    let h = 1.0 / sol.mesh() as f64;
    for j in (0..sol.mesh()).step_by(53) {
        let mid = (j as f64 + 0.5) * h;
        assert!(sol.residual(mid) < 1e-8, "residual at {mid}");
    }
}

#[test]
fn lq_exact_special_points() {
    let p = build_problem("lq", &opts(Some(3))).unwrap();
    let jet = p.exact(0.4, &[0.0; 3]).unwrap();
    assert_eq!(jet.value, 0.0);
    assert!(jet.gradient.iter().all(|g| *g == 0.0));
    let sol = RiccatiSolution::solve(LqParams::defaults(3, 1.0), DEFAULT_MESH).unwrap();
    let (k, _) = sol.eval(0.4);
    for (h, k) in jet.hessian.iter().zip(&k) {
        assert!((h - 2.0 * k).abs() < 1e-14);
    }
    let x = [0.3, -1.0, 2.0];
    let at_t = p.exact(1.0, &x).unwrap();
    assert!((at_t.value - p.terminal(&x)).abs() < 1e-14);
}

fn fd5(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h)
}

#[test]
fn scott_coefficients_solve_their_odes() {
    let mut sets = vec![ParameterSet::one_asset()];
    for n in [1, 4, 7, 9] {
        sets.push(ParameterSet::no_leverage(n).unwrap());
    }
    let mut s = rng(6);
    for set in sets {
        let sol = ScottSolution::new(set.eta, 1.0, set.factors.clone());
        for i in 0..set.factors.len() {
            let at_t = sol.coefficients(i, 1.0);
            assert_eq!((at_t.phi, at_t.psi, at_t.chi), (0.0, 0.0, 0.0));
            for _ in 0..100 {
                let t = 0.01 + 0.98 * s.uniform();
                let c = sol.coefficients(i, t);
                let h = 1e-3;
                let r_phi = fd5(|t| sol.coefficients(i, t).phi, t, h) - c.phi_dot;
                let r_psi = fd5(|t| sol.coefficients(i, t).psi, t, h) - c.psi_dot;
                let r_chi = fd5(|t| sol.coefficients(i, t).chi, t, h) - c.chi_dot;
                assert!(
                    r_phi.abs() < 1e-9 && r_psi.abs() < 1e-9 && r_chi.abs() < 1e-9,
                    "{r_phi:e} {r_psi:e} {r_chi:e}"
                );
                assert!(c.phi >= 0.0);
            }
        }
        let v: Vec<f64> = set.factors.iter().map(|f| f.theta).collect();
        assert!(sol.w(0.0, &v) > 0.0);
        assert_eq!(sol.w(1.0, &v), 1.0);
    }
}

#[test]
fn scott_values_at_expiry_are_the_utility() {
    let p = build_problem("no-leverage-scott4", &ProblemOptions::default()).unwrap();
    let x = [0.7, 0.1, 0.3, -0.2, 0.5];
    let jet = p.exact(1.0, &x).unwrap();
    assert!((jet.value - p.terminal(&x)).abs() < 1e-15);
}

#[test]
fn no_leverage_table_values() {
    for (name, reference) in [
        ("no-leverage-scott1", -0.501566),
        ("no-leverage-scott4", -0.441765),
        ("no-leverage-scott7", -0.394938),
        ("no-leverage-scott9", -0.275092),
    ] {
        let p = build_problem(name, &ProblemOptions::default()).unwrap();
        let u = p.exact(0.0, p.initial_state()).unwrap().value;
        assert!(((u - reference) / reference).abs() < 5e-5, "{name}: {u} vs {reference}");
    }
}

/// The uncorrelated generator written out directly:
/// `−½R z₀²/γ₀₀ + Σ κᵢ(θᵢ − vᵢ)zᵢ + ½νᵢ²γᵢᵢ`.
fn no_leverage_generator(factors: &[FactorParams], x: &[f64], z: &[f64], gamma: &[f64]) -> f64 {
    let d = factors.len() + 1;
    let r: f64 = factors.iter().zip(&x[1..]).map(|(f, v)| (f.lambda * v).powi(2)).sum();
    let mut out = -0.5 * r * z[0] * z[0] / gamma[0];
    for (i, f) in factors.iter().enumerate() {
        let k = i + 1;
        out += f.kappa * (f.theta - x[k]) * z[k] + 0.5 * f.nu * f.nu * gamma[k * d + k];
    }
    out
}

#[test]
fn uncorrelated_one_asset_reduces_to_no_leverage() {
    let opts = ProblemOptions {
        overrides: vec![("rho".into(), 0.0)],
        ..Default::default()
    };
    let p = build_problem("one-asset-scott", &opts).unwrap();
    let factors = ParameterSet::one_asset()
        .factors
        .into_iter()
        .map(|f| FactorParams { rho: 0.0, ..f })
        .collect::<Vec<_>>();
    let clamps = Clamps::new();
    let mut s = rng(7);
    for _ in 0..1000 {
        let x = [2.0 * s.uniform(), 0.4 + s.normal() * 0.3];
        let z = [s.uniform() + 0.1, s.normal()];
        let gamma = [-(s.uniform() + 0.1), s.normal(), s.normal(), s.normal()];
        let got = p.generator(
            &GenArgs {
                t: 0.3,
                x: &x,
                y: -0.5,
                z: &z,
                gamma: &gamma,
            },
            &clamps,
        );
        let want = no_leverage_generator(&factors, &x, &z, &gamma);
        assert!((got - want).abs() < 1e-13 * (1.0 + want.abs()));
    }
}

#[test]
fn monte_carlo_matches_closed_form() {
    for n in [1, 4, 7, 9] {
        let set = ParameterSet::no_leverage(n).unwrap();
        let sol = ScottSolution::new(set.eta, 1.0, set.factors.clone());
        let v: Vec<f64> = set.factors.iter().map(|f| f.theta).collect();
        let mc = mc_w_estimate(
            0.0,
            &v,
            &set.factors,
            1.0,
            100_000,
            StreamKey::new(n as u64, Purpose::MonteCarlo, 0, 0),
        );
        let exact = sol.w(0.0, &v);
        assert!(
            (mc.estimate - exact).abs() < 3.0 * mc.std_error,
            "n={n}: {} ± {} vs {exact}",
            mc.estimate,
            mc.std_error
        );
    }
}

#[test]
fn monte_carlo_without_noise_is_the_mean_path_integral() {
    let f = FactorParams {
        kappa: 1.3,
        theta: 0.4,
        nu: 0.0,
        lambda: 1.5,
        rho: 0.0,
    };
    let (t, v, maturity) = (0.2, 0.9, 1.0);
    let tau: f64 = maturity - t;
    let a = v - f.theta;
    let k = f.kappa;
    let integral = f.lambda.powi(2)
        * (f.theta.powi(2) * tau
            + 2.0 * f.theta * a * (1.0 - (-k * tau).exp()) / k
            + a * a * (1.0 - (-2.0 * k * tau).exp()) / (2.0 * k));
    let mc = mc_w_estimate(
        t,
        &[v],
        &[f],
        maturity,
        1_000,
        StreamKey::new(0, Purpose::MonteCarlo, 0, 0),
    );
    assert!((mc.estimate - (-0.5 * integral).exp()).abs() < 1e-6);
    assert!(mc.std_error < 1e-12);
}

#[test]
fn monge_ampere_oracle_is_affine_in_time() {
    let p = build_problem("monge-ampere", &ProblemOptions::default()).unwrap();
    let x = [0.3, 1.2, -0.4, 0.8, 1.0];
    assert!((p.exact(1.0, &x).unwrap().value - p.terminal(&x)).abs() < 1e-15);
    let u = |t: f64| p.exact(t, &x).unwrap().value;
    assert!((u(0.0) - 2.0 * u(0.5) + u(1.0)).abs() < 1e-14);
    assert!((u(0.0) - u(1.0) - 1.0).abs() < 1e-14);
}
