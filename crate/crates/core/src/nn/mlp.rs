use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_traits::Float;

use crate::rng::{Purpose, StreamKey};
use crate::{Error, Result};

/// Shape of a dense network: `hidden_layers` tanh layers of `width` units
/// between an identity output layer and the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden_layers: usize,
    pub width: usize,
}

impl Architecture {
    pub fn new(input_dim: usize, output_dim: usize, hidden_layers: usize, width: usize) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 || width == 0 {
            return Err(Error::Config("network dimensions must be positive".into()));
        }
        if hidden_layers == 0 {
            return Err(Error::Config("a network needs at least one hidden layer".into()));
        }
        Ok(Self {
            input_dim,
            output_dim,
            hidden_layers,
            width,
        })
    }

    /// Number of affine maps (hidden layers + output layer).
    pub fn affine_layers(&self) -> usize {
        self.hidden_layers + 1
    }

    /// `(rows, cols)` of the weight matrix of affine layer `l`.
    pub fn layer_shape(&self, l: usize) -> (usize, usize) {
        let rows = if l + 1 == self.affine_layers() {
            self.output_dim
        } else {
            self.width
        };
        let cols = if l == 0 { self.input_dim } else { self.width };
        (rows, cols)
    }

    /// Total parameter count: weights plus one bias per output unit of every
    /// affine layer.
    pub fn param_count(&self) -> usize {
        (0..self.affine_layers())
            .map(|l| {
                let (rows, cols) = self.layer_shape(l);
                rows * (cols + 1)
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Span {
    weights: usize,
    bias: usize,
    rows: usize,
    cols: usize,
}

/// Feedforward network `x ↦ A_L ∘ tanh ∘ A_{L-1} ∘ … ∘ tanh ∘ A_1(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    arch: Architecture,
    params: Vec<f64>,
    spans: Vec<Span>,
}

/// Activation cache for a single forward pass plus backprop buffers.
#[derive(Debug, Clone)]
pub struct Workspace {
    // acts[l] is the input of affine layer l; the last entry is the output.
    acts: Vec<Vec<f64>>,
    bar_a: Vec<f64>,
    bar_s: Vec<f64>,
}

/// Forward-mode cache: activations and their derivatives with respect to
/// every input coordinate.
#[derive(Debug, Clone)]
pub struct TangentWorkspace {
    acts: Vec<Vec<f64>>,
    // pre-activation tangents of layer l, direction-major `input_dim × rows`
    s_dot: Vec<Vec<f64>>,
    // tangents of acts[l + 1], same layout
    a_dot: Vec<Vec<f64>>,
    bar_a: Vec<f64>,
    bar_s: Vec<f64>,
    bar_t: Vec<f64>,
    bar_sd: Vec<f64>,
}

fn spans_for(arch: &Architecture) -> Vec<Span> {
    let mut offset = 0;
    (0..arch.affine_layers())
        .map(|l| {
            let (rows, cols) = arch.layer_shape(l);
            let span = Span {
                weights: offset,
                bias: offset + rows * cols,
                rows,
                cols,
            };
            offset += rows * (cols + 1);
            span
        })
        .collect()
}

impl Mlp {
    /// All-zero network.
    pub fn zeros(arch: Architecture) -> Self {
        Self {
            params: vec![0.0; arch.param_count()],
            spans: spans_for(&arch),
            arch,
        }
    }

    /// Glorot-uniform weights, zero biases. Deterministic in `seed`.
    pub fn glorot(arch: Architecture, seed: u64) -> Self {
        let mut net = Self::zeros(arch);
        let mut stream = StreamKey::new(seed, Purpose::Init, 0, 0).stream(0);
        for span in net.spans.clone() {
            let limit = (6.0 / (span.rows + span.cols) as f64).sqrt();
            for w in &mut net.params[span.weights..span.bias] {
                *w = limit * (2.0 * stream.uniform() - 1.0);
            }
        }
        net
    }

    pub fn from_params(arch: Architecture, params: Vec<f64>) -> Result<Self> {
        if params.len() != arch.param_count() {
            return Err(Error::Shape {
                expected: arch.param_count(),
                actual: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            params,
            spans: spans_for(&arch),
            arch,
        })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Index range of the output-layer biases inside the parameter vector.
    pub fn output_bias_range(&self) -> Range<usize> {
        let last = self.spans[self.spans.len() - 1];
        last.bias..last.bias + last.rows
    }

    /// Index ranges `(weights, bias)` of affine layer `l`.
    pub fn layer_ranges(&self, l: usize) -> (Range<usize>, Range<usize>) {
        let s = self.spans[l];
        (s.weights..s.bias, s.bias..s.bias + s.rows)
    }

    pub fn workspace(&self) -> Workspace {
        let max = self.max_dim();
        Workspace {
            acts: self.act_buffers(),
            bar_a: vec![0.0; max],
            bar_s: vec![0.0; max],
        }
    }

    pub fn tangent_workspace(&self) -> TangentWorkspace {
        let max = self.max_dim();
        let n = self.arch.input_dim;
        TangentWorkspace {
            acts: self.act_buffers(),
            s_dot: self.spans.iter().map(|s| vec![0.0; s.rows * n]).collect(),
            a_dot: self.spans.iter().map(|s| vec![0.0; s.rows * n]).collect(),
            bar_a: vec![0.0; max],
            bar_s: vec![0.0; max],
            bar_t: vec![0.0; max * n],
            bar_sd: vec![0.0; max * n],
        }
    }

    fn max_dim(&self) -> usize {
        self.arch.input_dim.max(self.arch.output_dim).max(self.arch.width)
    }

    fn act_buffers(&self) -> Vec<Vec<f64>> {
        let mut acts = vec![vec![0.0; self.arch.input_dim]];
        acts.extend(self.spans.iter().map(|s| vec![0.0; s.rows]));
        acts
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.arch.input_dim {
            return Err(Error::Shape {
                expected: self.arch.input_dim,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Network output at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut ws = self.workspace();
        Ok(self.forward(x, &mut ws).to_vec())
    }

    /// Forward pass caching activations in `ws`; returns the output slice.
    ///
    /// Panics if `x` has the wrong length.
    pub fn forward<'w>(&self, x: &[f64], ws: &'w mut Workspace) -> &'w [f64] {
        forward_acts(&self.params, &self.spans, x, &mut ws.acts);
        ws.acts.last().unwrap()
    }

    /// Accumulates `∂⟨d_out, output⟩/∂θ` into `grad` using the activations of
    /// the last [`Mlp::forward`] call on `ws`.
    pub fn backward(&self, ws: &mut Workspace, d_out: &[f64], grad: &mut [f64]) {
        let last = self.spans.len() - 1;
        let Workspace { acts, bar_a, bar_s } = ws;
        bar_a[..d_out.len()].copy_from_slice(d_out);
        for l in (0..=last).rev() {
            let span = self.spans[l];
            let (rows, cols) = (span.rows, span.cols);
            if l == last {
                bar_s[..rows].copy_from_slice(&bar_a[..rows]);
            } else {
                let a = &acts[l + 1];
                for u in 0..rows {
                    bar_s[u] = (1.0 - a[u] * a[u]) * bar_a[u];
                }
            }
            let prev = &acts[l];
            for u in 0..rows {
                let su = bar_s[u];
                if su != 0.0 {
                    let row = &mut grad[span.weights + u * cols..span.weights + (u + 1) * cols];
                    for (g, p) in row.iter_mut().zip(prev) {
                        *g += su * p;
                    }
                }
                grad[span.bias + u] += su;
            }
            if l > 0 {
                bar_a[..cols].iter_mut().for_each(|v| *v = 0.0);
                for u in 0..rows {
                    let su = bar_s[u];
                    let row = &self.params[span.weights + u * cols..span.weights + (u + 1) * cols];
                    for (b, w) in bar_a[..cols].iter_mut().zip(row) {
                        *b += w * su;
                    }
                }
            }
        }
    }

    /// Forward pass propagating the derivatives with respect to every input
    /// coordinate. Returns the output slice.
    pub fn forward_tangents<'w>(&self, x: &[f64], tws: &'w mut TangentWorkspace) -> &'w [f64] {
        let n = self.arch.input_dim;
        forward_acts(&self.params, &self.spans, x, &mut tws.acts);
        let last = self.spans.len() - 1;
        for l in 0..=last {
            let span = self.spans[l];
            let (rows, cols) = (span.rows, span.cols);
            let w = &self.params[span.weights..span.bias];
            let (before, after) = tws.a_dot.split_at_mut(l);
            let s_dot = &mut tws.s_dot[l];
            if l == 0 {
                for u in 0..rows {
                    for k in 0..n {
                        s_dot[k * rows + u] = w[u * cols + k];
                    }
                }
            } else {
                let prev = &before[l - 1];
                for k in 0..n {
                    let pk = &prev[k * cols..(k + 1) * cols];
                    for u in 0..rows {
                        let row = &w[u * cols..(u + 1) * cols];
                        s_dot[k * rows + u] = row.iter().zip(pk).map(|(a, b)| a * b).sum();
                    }
                }
            }
            let a_dot = &mut after[0];
            if l == last {
                a_dot.copy_from_slice(s_dot);
            } else {
                let a = &tws.acts[l + 1];
                for k in 0..n {
                    for u in 0..rows {
                        a_dot[k * rows + u] = (1.0 - a[u] * a[u]) * s_dot[k * rows + u];
                    }
                }
            }
        }
        tws.acts.last().unwrap()
    }

    /// Copies the Jacobian rows `head` (each of length `input_dim`) computed by
    /// the last [`Mlp::forward_tangents`] call into `out`.
    pub fn jacobian_rows(&self, tws: &TangentWorkspace, head: Range<usize>, out: &mut [f64]) {
        let n = self.arch.input_dim;
        let rows = self.arch.output_dim;
        let jac = tws.a_dot.last().unwrap();
        for (r, u) in head.enumerate() {
            for k in 0..n {
                out[r * n + k] = jac[k * rows + u];
            }
        }
    }

    /// Exact input Jacobian of the outputs in `head`, row-major
    /// `|head| × input_dim`.
    pub fn input_jacobian(&self, x: &[f64], head: Range<usize>) -> Result<Vec<f64>> {
        self.check_input(x)?;
        if head.end > self.arch.output_dim || head.start > head.end {
            return Err(Error::Shape {
                expected: self.arch.output_dim,
                actual: head.end,
            });
        }
        let mut tws = self.tangent_workspace();
        self.forward_tangents(x, &mut tws);
        let mut out = vec![0.0; head.len() * self.arch.input_dim];
        self.jacobian_rows(&tws, head, &mut out);
        Ok(out)
    }

    /// Accumulates into `grad` the parameter gradient of
    /// `⟨d_out, output⟩ + ⟨d_jac, ∂output/∂x⟩`, where `d_jac` is a full
    /// `output_dim × input_dim` adjoint of the Jacobian. Uses the cache of the
    /// last [`Mlp::forward_tangents`] call.
    pub fn backward_tangents(
        &self,
        tws: &mut TangentWorkspace,
        d_out: Option<&[f64]>,
        d_jac: &[f64],
        grad: &mut [f64],
    ) {
        let n = self.arch.input_dim;
        let last = self.spans.len() - 1;
        let TangentWorkspace {
            acts,
            s_dot,
            a_dot,
            bar_a,
            bar_s,
            bar_t,
            bar_sd,
        } = tws;
        let out_dim = self.arch.output_dim;
        match d_out {
            Some(d) => bar_a[..out_dim].copy_from_slice(d),
            None => bar_a[..out_dim].iter_mut().for_each(|v| *v = 0.0),
        }
        // tangent adjoints are stored direction-major, `n × rows`
        for u in 0..out_dim {
            for k in 0..n {
                bar_t[k * out_dim + u] = d_jac[u * n + k];
            }
        }
        for l in (0..=last).rev() {
            let span = self.spans[l];
            let (rows, cols) = (span.rows, span.cols);
            if l == last {
                bar_s[..rows].copy_from_slice(&bar_a[..rows]);
                bar_sd[..rows * n].copy_from_slice(&bar_t[..rows * n]);
            } else {
                let a = &acts[l + 1];
                let sd = &s_dot[l];
                for u in 0..rows {
                    let deriv = 1.0 - a[u] * a[u];
                    let mut corr = 0.0;
                    for k in 0..n {
                        corr += sd[k * rows + u] * bar_t[k * rows + u];
                        bar_sd[k * rows + u] = deriv * bar_t[k * rows + u];
                    }
                    bar_s[u] = deriv * (bar_a[u] - 2.0 * a[u] * corr);
                }
            }
            let prev = &acts[l];
            let gw = &mut grad[span.weights..span.bias];
            for u in 0..rows {
                let su = bar_s[u];
                let row = &mut gw[u * cols..(u + 1) * cols];
                for (g, p) in row.iter_mut().zip(prev) {
                    *g += su * p;
                }
            }
            if l == 0 {
                for u in 0..rows {
                    for v in 0..cols {
                        gw[u * cols + v] += bar_sd[v * rows + u];
                    }
                }
            } else {
                let prev_dot = &a_dot[l - 1];
                for k in 0..n {
                    let pk = &prev_dot[k * cols..(k + 1) * cols];
                    for u in 0..rows {
                        let c = bar_sd[k * rows + u];
                        if c != 0.0 {
                            let row = &mut gw[u * cols..(u + 1) * cols];
                            for (g, p) in row.iter_mut().zip(pk) {
                                *g += c * p;
                            }
                        }
                    }
                }
            }
            for u in 0..rows {
                grad[span.bias + u] += bar_s[u];
            }
            if l > 0 {
                let w = &self.params[span.weights..span.bias];
                bar_a[..cols].iter_mut().for_each(|v| *v = 0.0);
                bar_t[..cols * n].iter_mut().for_each(|v| *v = 0.0);
                for u in 0..rows {
                    let row = &w[u * cols..(u + 1) * cols];
                    let su = bar_s[u];
                    for (b, wv) in bar_a[..cols].iter_mut().zip(row) {
                        *b += wv * su;
                    }
                    for k in 0..n {
                        let c = bar_sd[k * rows + u];
                        if c != 0.0 {
                            for (t, wv) in bar_t[k * cols..(k + 1) * cols].iter_mut().zip(row) {
                                *t += wv * c;
                            }
                        }
                    }
                }
            }
        }
    }
}

fn forward_acts(params: &[f64], spans: &[Span], x: &[f64], acts: &mut [Vec<f64>]) {
    acts[0].copy_from_slice(x);
    let last = spans.len() - 1;
    for (l, span) in spans.iter().enumerate() {
        let (head, tail) = acts.split_at_mut(l + 1);
        let input = &head[l];
        let out = &mut tail[0];
        let w = &params[span.weights..span.bias];
        let b = &params[span.bias..span.bias + span.rows];
        for u in 0..span.rows {
            let row = &w[u * span.cols..(u + 1) * span.cols];
            let mut acc = b[u];
            for (wi, xi) in row.iter().zip(input.iter()) {
                acc += wi * xi;
            }
            out[u] = if l == last { acc } else { acc.tanh() };
        }
    }
}
