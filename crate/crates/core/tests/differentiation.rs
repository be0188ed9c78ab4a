use dbs_core::nn::{jacobian_param_grad, loss_param_grad};
use dbs_core::rng::{Purpose, StreamKey};
use dbs_core::{Architecture, Mlp};
use proptest::prelude::*;

/// `(input, output, hidden layers, width)` of every shipped default network.
const SHIPPED: [(usize, usize, usize, usize); 7] = [
    (1, 2, 2, 20),
    (3, 4, 2, 50),
    (5, 6, 3, 15),
    (1, 2, 2, 11),
    (2, 3, 2, 12),
    (5, 6, 2, 15),
    (10, 11, 2, 20),
];

fn random_net(shape: (usize, usize, usize, usize), seed: u64, scale: f64) -> Mlp {
    let arch = Architecture::new(shape.0, shape.1, shape.2, shape.3).unwrap();
    let mut s = StreamKey::new(seed, Purpose::Auxiliary, 0, 0).stream(0);
    let params = (0..arch.param_count())
        .map(|_| scale * s.normal() / (shape.3 as f64).sqrt())
        .collect();
    Mlp::from_params(arch, params).unwrap()
}

fn random_points(n: usize, count: usize, seed: u64) -> Vec<f64> {
    let mut s = StreamKey::new(seed, Purpose::Auxiliary, 1, 0).stream(0);
    (0..n * count).map(|_| s.normal()).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn frobenius_rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-8);
    num / den
}

fn fd_jacobian(net: &Mlp, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let d1 = net.arch().output_dim;
    let step = 1e-5;
    let mut jac = vec![0.0; d1 * n];
    let mut p = x.to_vec();
    for k in 0..n {
        p[k] = x[k] + step;
        let up = net.eval(&p).unwrap();
        p[k] = x[k] - step;
        let down = net.eval(&p).unwrap();
        p[k] = x[k];
        for r in 0..d1 {
            jac[r * n + k] = (up[r] - down[r]) / (2.0 * step);
        }
    }
    jac
}

/// Loss mixing values and the Jacobian of the gradient head, as in the
/// implicit regression.
fn mixed_loss(out: &[f64], jac: &[f64], d_out: &mut [f64], d_jac: &mut [f64]) -> f64 {
    let mut l = 0.0;
    for (k, (o, d)) in out.iter().zip(d_out.iter_mut()).enumerate() {
        let w = 1.0 + k as f64;
        l += w * o * o;
        *d = 2.0 * w * o;
    }
    for (k, (j, d)) in jac.iter().zip(d_jac.iter_mut()).enumerate() {
        let w = 0.5 + 0.1 * k as f64;
        l += w * j * j.sin();
        *d = w * (j.sin() + j * j.cos());
    }
    l
}

fn mixed_value(net: &Mlp, x: &[f64]) -> f64 {
    let n = net.arch().input_dim;
    let d1 = net.arch().output_dim;
    let mut total = 0.0;
    let mut d_out = vec![0.0; d1];
    let mut d_jac = vec![0.0; (d1 - 1) * n];
    for p in x.chunks(n) {
        let out = net.eval(p).unwrap();
        let jac = net.input_jacobian(p, 1..d1).unwrap();
        total += mixed_loss(&out, &jac, &mut d_out, &mut d_jac);
    }
    total / (x.len() / n) as f64
}

fn value_loss(out: &[f64], d_out: &mut [f64]) -> f64 {
    let mut l = 0.0;
    for (k, (o, d)) in out.iter().zip(d_out.iter_mut()).enumerate() {
        let c = 0.3 * k as f64 - 0.2;
        l += (o - c).powi(2) + 0.1 * o.powi(3);
        *d = 2.0 * (o - c) + 0.3 * o * o;
    }
    l
}

fn value_only(net: &Mlp, x: &[f64]) -> f64 {
    let n = net.arch().input_dim;
    let d1 = net.arch().output_dim;
    let mut d = vec![0.0; d1];
    let total: f64 = x.chunks(n).map(|p| value_loss(&net.eval(p).unwrap(), &mut d)).sum();
    total / (x.len() / n) as f64
}

fn shifted(net: &Mlp, dir: &[f64], h: f64) -> Mlp {
    let params = net.params().iter().zip(dir).map(|(p, v)| p + h * v).collect();
    Mlp::from_params(*net.arch(), params).unwrap()
}

fn direction(len: usize, seed: u64) -> Vec<f64> {
    let mut s = StreamKey::new(seed, Purpose::Auxiliary, 2, 0).stream(0);
    let v: Vec<f64> = (0..len).map(|_| s.normal()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn input_jacobian_matches_central_differences(idx in 0..SHIPPED.len(), seed in any::<u64>(), scale in 0.5f64..2.0) {
        let shape = SHIPPED[idx];
        let net = random_net(shape, seed, scale);
        for x in random_points(shape.0, 3, seed ^ 1).chunks(shape.0) {
            let exact = net.input_jacobian(x, 0..shape.1).unwrap();
            let fd = fd_jacobian(&net, x);
            prop_assert!(frobenius_rel(&exact, &fd) < 1e-6, "{:?}", shape);
        }
    }

    #[test]
    fn parameter_gradient_matches_directional_differences(idx in 0..SHIPPED.len(), seed in any::<u64>()) {
        let shape = SHIPPED[idx];
        let net = random_net(shape, seed, 1.0);
        let x = random_points(shape.0, 4, seed ^ 2);
        let mut grad = vec![0.0; net.param_count()];
        loss_param_grad(&net, &x, &mut grad, |_, o, d| value_loss(o, d)).unwrap();
        let h = 1e-5;
        for k in 0..20 {
            let v = direction(net.param_count(), seed.wrapping_add(k));
            let fd = (value_only(&shifted(&net, &v, h), &x) - value_only(&shifted(&net, &v, -h), &x)) / (2.0 * h);
            let an: f64 = grad.iter().zip(&v).map(|(g, v)| g * v).sum();
            prop_assert!(rel(an, fd) < 1e-6 || (an - fd).abs() < 1e-10, "{an} vs {fd}");
        }
    }

    #[test]
    fn jacobian_loss_gradient_matches_directional_differences(idx in 0..SHIPPED.len(), seed in any::<u64>()) {
        let shape = SHIPPED[idx];
        let net = random_net(shape, seed, 1.0);
        let x = random_points(shape.0, 3, seed ^ 3);
        let mut grad = vec![0.0; net.param_count()];
        jacobian_param_grad(&net, &x, 1..shape.1, &mut grad, |_, o, j, d, dj| mixed_loss(o, j, d, dj)).unwrap();
        let h = 1e-5;
        for k in 0..5 {
            let v = direction(net.param_count(), seed.wrapping_add(100 + k));
            let fd = (mixed_value(&shifted(&net, &v, h), &x) - mixed_value(&shifted(&net, &v, -h), &x)) / (2.0 * h);
            let an: f64 = grad.iter().zip(&v).map(|(g, v)| g * v).sum();
            prop_assert!(rel(an, fd) < 1e-6 || (an - fd).abs() < 1e-10, "{an} vs {fd}");
        }
    }
}

#[test]
fn duplicated_batch_leaves_gradient_unchanged() {
    let net = random_net((3, 4, 2, 8), 11, 1.0);
    let x = random_points(3, 5, 12);
    let twice: Vec<f64> = x.iter().chain(&x).copied().collect();
    let mut g1 = vec![0.0; net.param_count()];
    let mut g2 = vec![0.0; net.param_count()];
    let l1 = loss_param_grad(&net, &x, &mut g1, |_, o, d| value_loss(o, d)).unwrap();
    let l2 = loss_param_grad(&net, &twice, &mut g2, |_, o, d| value_loss(o, d)).unwrap();
    assert!((l1 - l2).abs() < 1e-14);
    for (a, b) in g1.iter().zip(&g2) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn jacobian_free_loss_matches_value_gradient() {
    let net = random_net((2, 3, 2, 7), 5, 1.0);
    let x = random_points(2, 6, 6);
    let mut g1 = vec![0.0; net.param_count()];
    let mut g2 = vec![0.0; net.param_count()];
    let l1 = loss_param_grad(&net, &x, &mut g1, |_, o, d| value_loss(o, d)).unwrap();
    let l2 = jacobian_param_grad(&net, &x, 1..3, &mut g2, |_, o, _, d, _| value_loss(o, d)).unwrap();
    assert!((l1 - l2).abs() < 1e-14);
    for (a, b) in g1.iter().zip(&g2) {
        assert!((a - b).abs() < 1e-13);
    }
}

#[test]
fn zero_network_output_norm_is_stationary_in_weights() {
    let arch = Architecture::new(3, 4, 2, 6).unwrap();
    let net = Mlp::zeros(arch);
    let x = random_points(3, 4, 7);
    let mut grad = vec![0.0; net.param_count()];
    loss_param_grad(&net, &x, &mut grad, |_, o, d| {
        for (dv, v) in d.iter_mut().zip(o) {
            *dv = 2.0 * v;
        }
        o.iter().map(|v| v * v).sum()
    })
    .unwrap();
    assert!(grad.iter().all(|g| *g == 0.0));
}

#[test]
fn zero_network_jacobian_norm_is_stationary_in_output_weights() {
    let arch = Architecture::new(2, 3, 2, 5).unwrap();
    let net = Mlp::zeros(arch);
    let x = random_points(2, 4, 8);
    let mut grad = vec![0.0; net.param_count()];
    jacobian_param_grad(&net, &x, 0..3, &mut grad, |_, _, j, _, dj| {
        for (d, v) in dj.iter_mut().zip(j) {
            *d = 2.0 * v;
        }
        j.iter().map(|v| v * v).sum()
    })
    .unwrap();
    let (weights, _) = net.layer_ranges(arch.affine_layers() - 1);
    assert!(grad[weights].iter().all(|g| *g == 0.0));
}

#[test]
fn rank_one_network_jacobian_sum() {
    // One hidden neuron: J = w₂ (1 − tanh²(w₁·x + b₁)) w₁ᵀ.
    let arch = Architecture::new(2, 2, 1, 1).unwrap();
    let params = vec![0.7, -0.4, 0.2, 1.3, -0.6, 0.1, 0.05];
    let net = Mlp::from_params(arch, params).unwrap();
    let x = [0.3, -0.8];
    let sum = |net: &Mlp| net.input_jacobian(&x, 0..2).unwrap().iter().sum::<f64>();
    let mut grad = vec![0.0; net.param_count()];
    jacobian_param_grad(&net, &x, 0..2, &mut grad, |_, _, j, _, dj| {
        dj.iter_mut().for_each(|d| *d = 1.0);
        j.iter().sum()
    })
    .unwrap();
    let h = 1e-6;
    for k in 0..net.param_count() {
        let mut e = vec![0.0; net.param_count()];
        e[k] = 1.0;
        let fd = (sum(&shifted(&net, &e, h)) - sum(&shifted(&net, &e, -h))) / (2.0 * h);
        assert!(
            rel(grad[k], fd) < 1e-5 || (grad[k] - fd).abs() < 1e-9,
            "param {k}: {} vs {fd}",
            grad[k]
        );
    }
}
