use alloc::vec;
use core::ops::Range;

use super::Mlp;
use crate::{Error, Result};

/// Mean loss over a batch and its parameter gradient.
///
/// `inputs` holds the batch row-major (`batch × input_dim`). For each sample
/// `per_sample(i, output, d_output)` returns its loss and writes the loss
/// derivative with respect to the network output into `d_output`.
pub fn loss_param_grad<F>(net: &Mlp, inputs: &[f64], grad: &mut [f64], mut per_sample: F) -> Result<f64>
where
    F: FnMut(usize, &[f64], &mut [f64]) -> f64,
{
    let n = net.arch().input_dim;
    let batch = check_batch(net, inputs, grad)?;
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut ws = net.workspace();
    let mut d_out = vec![0.0; net.arch().output_dim];
    let mut total = 0.0;
    for i in 0..batch {
        let out = net.forward(&inputs[i * n..(i + 1) * n], &mut ws).to_vec();
        d_out.iter_mut().for_each(|v| *v = 0.0);
        total += per_sample(i, &out, &mut d_out);
        net.backward(&mut ws, &d_out, grad);
    }
    finish(total, batch, grad)
}

/// Like [`loss_param_grad`] for losses that also depend on the input
/// Jacobian of the outputs in `head`.
///
/// The closure receives `(i, output, jacobian, d_output, d_jacobian)`, where
/// `jacobian` and `d_jacobian` are row-major `|head| × input_dim`.
pub fn jacobian_param_grad<F>(
    net: &Mlp,
    inputs: &[f64],
    head: Range<usize>,
    grad: &mut [f64],
    mut per_sample: F,
) -> Result<f64>
where
    F: FnMut(usize, &[f64], &[f64], &mut [f64], &mut [f64]) -> f64,
{
    let n = net.arch().input_dim;
    let d1 = net.arch().output_dim;
    if head.end > d1 || head.start > head.end {
        return Err(Error::Shape {
            expected: d1,
            actual: head.end,
        });
    }
    let batch = check_batch(net, inputs, grad)?;
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut tws = net.tangent_workspace();
    let mut d_out = vec![0.0; d1];
    let mut jac = vec![0.0; head.len() * n];
    let mut d_head = vec![0.0; head.len() * n];
    let mut d_jac = vec![0.0; d1 * n];
    let mut total = 0.0;
    for i in 0..batch {
        let out = net.forward_tangents(&inputs[i * n..(i + 1) * n], &mut tws).to_vec();
        net.jacobian_rows(&tws, head.clone(), &mut jac);
        d_out.iter_mut().for_each(|v| *v = 0.0);
        d_head.iter_mut().for_each(|v| *v = 0.0);
        total += per_sample(i, &out, &jac, &mut d_out, &mut d_head);
        d_jac[head.start * n..head.end * n].copy_from_slice(&d_head);
        net.backward_tangents(&mut tws, Some(&d_out), &d_jac, grad);
    }
    finish(total, batch, grad)
}

fn check_batch(net: &Mlp, inputs: &[f64], grad: &[f64]) -> Result<usize> {
    let n = net.arch().input_dim;
    if grad.len() != net.param_count() {
        return Err(Error::Shape {
            expected: net.param_count(),
            actual: grad.len(),
        });
    }
    if inputs.is_empty() || inputs.len() % n != 0 {
        return Err(Error::Shape {
            expected: n,
            actual: inputs.len(),
        });
    }
    Ok(inputs.len() / n)
}

fn finish(total: f64, batch: usize, grad: &mut [f64]) -> Result<f64> {
    let scale = 1.0 / batch as f64;
    grad.iter_mut().for_each(|g| *g *= scale);
    let loss = total * scale;
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(loss)
}
