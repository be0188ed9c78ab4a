use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::linalg::{dot, symmetrize, trace_product};
use crate::nn::{loss_param_grad, Adam, Architecture, LrController, Mlp};
use crate::problem::{Clamps, GenArgs, GeneratorGrad, Problem};
use crate::rng::{Purpose, StreamKey};
use crate::sde::{sample_transition, TimeGrid, Transition};
use crate::truncation::Truncation;
use crate::{Error, Result};

use super::config::{HessianMode, SchemeConfig, TerminalDerivative};

/// One outer-iteration record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub step: usize,
    pub outer: usize,
    pub validation_loss: f64,
    pub lr: f64,
    /// Cumulative denominator clamps of the run so far.
    pub clamps: u64,
}

/// Diagnostics of one optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    /// Validation loss before the first update.
    pub initial_loss: f64,
    pub final_loss: f64,
    pub rows: Vec<LogRow>,
}

/// Network outputs at one point: `u`, `z` and the symmetrized Jacobian of
/// `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub u: f64,
    pub z: Vec<f64>,
    pub gamma: Vec<f64>,
}

/// Trained networks `Û_i, Ẑ_i` for `i = 0, …, N` with training diagnostics.
#[derive(Debug, Clone)]
pub struct SchemeSolution {
    pub grid: TimeGrid,
    pub mode: HessianMode,
    networks: Vec<Mlp>,
    /// Reports in training order (maturity first).
    pub reports: Vec<StepReport>,
    pub clamps: u64,
}

impl SchemeSolution {
    pub fn networks(&self) -> &[Mlp] {
        &self.networks
    }

    pub fn network(&self, i: usize) -> &Mlp {
        &self.networks[i]
    }

    /// All log rows in training order.
    pub fn log(&self) -> impl Iterator<Item = &LogRow> {
        self.reports.iter().flat_map(|r| r.rows.iter())
    }

    /// `(Û_i(x), Ẑ_i(x), sym DẐ_i(x))`.
    pub fn evaluate(&self, i: usize, x: &[f64]) -> Result<Evaluation> {
        let net = self.networks.get(i).ok_or(Error::Shape {
            expected: self.networks.len(),
            actual: i,
        })?;
        let d = x.len();
        let out = net.eval(x)?;
        let mut gamma = net.input_jacobian(x, 1..d + 1)?;
        symmetrize(&mut gamma, d);
        Ok(Evaluation {
            u: out[0],
            z: out[1..].to_vec(),
            gamma,
        })
    }
}

/// Shared state of one backward run.
pub struct StepContext<'a> {
    pub problem: &'a dyn Problem,
    pub grid: &'a TimeGrid,
    pub truncation: Option<Truncation>,
    pub clamps: Clamps,
    cov: Vec<f64>,
}

impl<'a> StepContext<'a> {
    pub fn new(problem: &'a dyn Problem, grid: &'a TimeGrid, quantile: Option<f64>) -> Result<Self> {
        if (grid.maturity() - problem.maturity()).abs() > 1e-12 * problem.maturity().max(1.0) {
            return Err(Error::Config("grid and problem maturities differ".into()));
        }
        let truncation = match quantile {
            Some(p) => Some(Truncation::new(
                problem.truncation_kind(),
                p,
                problem.dynamics(),
                problem.initial_state(),
            )?),
            None => None,
        };
        Ok(Self {
            problem,
            grid,
            truncation,
            clamps: Clamps::new(),
            cov: problem.dynamics().covariance(),
        })
    }

    pub fn dim(&self) -> usize {
        self.problem.dim()
    }

    /// Training samples on `[t_i, t_{i+1}]`.
    pub fn transition(&self, i: usize, batch: usize, key: StreamKey) -> Result<Transition> {
        sample_transition(
            self.problem.dynamics(),
            self.problem.initial_state(),
            self.grid,
            i,
            batch,
            key,
        )
    }

    fn truncate(&self, t: f64, x: &mut [f64]) {
        if let Some(tr) = &self.truncation {
            tr.apply(t, x);
        }
    }

    /// Squared residual `(F − target)²` of one sample and its derivatives
    /// with respect to `(y, z)` (into `d_out`) and `γ` (into `d_gamma`).
    #[allow(clippy::too_many_arguments)]
    fn sample_loss(
        &self,
        i: usize,
        x: &[f64],
        out: &[f64],
        gamma: &[f64],
        mu: &[f64],
        sdw: &[f64],
        target: f64,
        gg: &mut GeneratorGrad,
        d_out: &mut [f64],
        d_gamma: &mut [f64],
    ) -> f64 {
        let d = self.dim();
        let t = self.grid.time(i);
        let h = self.grid.dt(i);
        let (y, z) = (out[0], &out[1..]);
        let args = GenArgs { t, x, y, z, gamma };
        let f = self.problem.generator_grad(&args, &self.clamps, gg);
        let ft = f - dot(mu, z) - 0.5 * trace_product(&self.cov, gamma, d);
        let r = y - ft * h + dot(z, sdw) - target;
        let s = 2.0 * r;
        d_out[0] = s * (1.0 - h * gg.dy);
        for j in 0..d {
            d_out[1 + j] = s * (sdw[j] - h * (gg.dz[j] - mu[j]));
        }
        for (k, dg) in d_gamma.iter_mut().enumerate() {
            *dg = -s * h * (gg.dgamma[k] - 0.5 * self.cov[k]);
        }
        r * r
    }
}

enum HessianSource {
    /// Symmetrized `DẐ_{i+1}(T(X_{i+1}))`, `B × d × d`.
    Frozen(Vec<f64>),
    /// Truncated `X_i`, `B × d`, where the trained network is differentiated.
    Live(Vec<f64>),
}

/// One batch of the regression at step `i` with every quantity that does not
/// depend on the trained parameters precomputed.
pub struct StepData {
    step: usize,
    x: Vec<f64>,
    target: Vec<f64>,
    mu: Vec<f64>,
    sdw: Vec<f64>,
    hessian: HessianSource,
}

impl StepData {
    /// Targets `Û_{i+1}(X_{i+1})`; the Hessian comes from `next` when `frozen`
    /// and from the trained network otherwise.
    pub fn new(ctx: &StepContext<'_>, i: usize, next: &Mlp, tr: &Transition, frozen: bool) -> Result<Self> {
        let d = ctx.dim();
        let b = tr.len();
        let dynamics = ctx.problem.dynamics();
        let mut target = vec![0.0; b];
        let mut mu = vec![0.0; b * d];
        let mut sdw = vec![0.0; b * d];
        let mut ws = next.workspace();
        let mut tws = next.tangent_workspace();
        let mut point = vec![0.0; d];
        let mut hess = vec![0.0; if frozen { b * d * d } else { b * d }];
        for s in 0..b {
            let row = s * d..(s + 1) * d;
            dynamics.drift_at(&tr.x[row.clone()], &mut mu[row.clone()]);
            dynamics.diffuse(&tr.dw[row.clone()], &mut sdw[row.clone()]);
            let x_next = &tr.x_next[row.clone()];
            if frozen {
                point.copy_from_slice(x_next);
                ctx.truncate(ctx.grid.time(i + 1), &mut point);
                let out = next.forward_tangents(&point, &mut tws)[0];
                target[s] = if point == x_next {
                    out
                } else {
                    next.forward(x_next, &mut ws)[0]
                };
                let g = &mut hess[s * d * d..(s + 1) * d * d];
                next.jacobian_rows(&tws, 1..d + 1, g);
                symmetrize(g, d);
            } else {
                target[s] = next.forward(x_next, &mut ws)[0];
                let p = &mut hess[row.clone()];
                p.copy_from_slice(&tr.x[row]);
                ctx.truncate(ctx.grid.time(i), p);
            }
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            step: i,
            x: tr.x.clone(),
            target,
            mu,
            sdw,
            hessian: if frozen {
                HessianSource::Frozen(hess)
            } else {
                HessianSource::Live(hess)
            },
        })
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    /// Mean loss; accumulates the mean parameter gradient into `grad` (after
    /// zeroing it) when given.
    pub fn loss(&self, ctx: &StepContext<'_>, net: &Mlp, mut grad: Option<&mut [f64]>) -> Result<f64> {
        let d = ctx.dim();
        let b = self.len();
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut gg = GeneratorGrad::new(d);
        let mut d_out = vec![0.0; d + 1];
        let mut d_gamma = vec![0.0; d * d];
        let mut total = 0.0;
        match &self.hessian {
            HessianSource::Frozen(hess) => {
                let mut ws = net.workspace();
                for s in 0..b {
                    let row = s * d..(s + 1) * d;
                    let x = &self.x[row.clone()];
                    let out = net.forward(x, &mut ws).to_vec();
                    total += ctx.sample_loss(
                        self.step,
                        x,
                        &out,
                        &hess[s * d * d..(s + 1) * d * d],
                        &self.mu[row.clone()],
                        &self.sdw[row],
                        self.target[s],
                        &mut gg,
                        &mut d_out,
                        &mut d_gamma,
                    );
                    if let Some(g) = grad.as_deref_mut() {
                        net.backward(&mut ws, &d_out, g);
                    }
                }
            }
            HessianSource::Live(points) => {
                let mut ws = net.workspace();
                let mut tws = net.tangent_workspace();
                let mut gamma = vec![0.0; d * d];
                let mut d_jac = vec![0.0; (d + 1) * d];
                for s in 0..b {
                    let row = s * d..(s + 1) * d;
                    let x = &self.x[row.clone()];
                    let out = net.forward(x, &mut ws).to_vec();
                    net.forward_tangents(&points[row.clone()], &mut tws);
                    net.jacobian_rows(&tws, 1..d + 1, &mut gamma);
                    symmetrize(&mut gamma, d);
                    total += ctx.sample_loss(
                        self.step,
                        x,
                        &out,
                        &gamma,
                        &self.mu[row.clone()],
                        &self.sdw[row],
                        self.target[s],
                        &mut gg,
                        &mut d_out,
                        &mut d_gamma,
                    );
                    if let Some(g) = grad.as_deref_mut() {
                        net.backward(&mut ws, &d_out, g);
                        symmetrize(&mut d_gamma, d);
                        d_jac[d..].copy_from_slice(&d_gamma);
                        net.backward_tangents(&mut tws, None, &d_jac, g);
                    }
                }
            }
        }
        let scale = 1.0 / b as f64;
        if let Some(g) = grad {
            g.iter_mut().for_each(|v| *v *= scale);
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        let loss = total * scale;
        if !loss.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(loss)
    }
}

/// Weight `Δt_{N−1}/d` of the gradient term of the terminal loss.
pub fn terminal_weight(grid: &TimeGrid, dim: usize) -> f64 {
    grid.dt(grid.steps() - 1) / dim as f64
}

/// Terminal regression batch: `g` and `Dg` at samples of `X_{t_N}`.
pub struct TerminalData {
    x: Vec<f64>,
    g: Vec<f64>,
    dg: Vec<f64>,
    weight: f64,
}

impl TerminalData {
    /// `dg_net`, when given, replaces the analytic `Dg` by its input gradient.
    pub fn new(ctx: &StepContext<'_>, x: Vec<f64>, dg_net: Option<&Mlp>) -> Result<Self> {
        let d = ctx.dim();
        let b = x.len() / d;
        let mut g = vec![0.0; b];
        let mut dg = vec![0.0; b * d];
        let mut tws = dg_net.map(|n| n.tangent_workspace());
        for s in 0..b {
            let row = s * d..(s + 1) * d;
            g[s] = ctx.problem.terminal(&x[row.clone()]);
            match (dg_net, tws.as_mut()) {
                (Some(net), Some(tws)) => {
                    net.forward_tangents(&x[row.clone()], tws);
                    net.jacobian_rows(tws, 0..1, &mut dg[row]);
                }
                _ => ctx.problem.terminal_grad(&x[row.clone()], &mut dg[row]),
            }
        }
        Ok(Self {
            x,
            g,
            dg,
            weight: terminal_weight(ctx.grid, d),
        })
    }

    pub fn loss(&self, net: &Mlp, grad: Option<&mut [f64]>) -> Result<f64> {
        let d = net.arch().input_dim;
        let per_sample = |s: usize, out: &[f64], d_out: &mut [f64]| {
            let r = out[0] - self.g[s];
            d_out[0] = 2.0 * r;
            let mut loss = r * r;
            for j in 0..d {
                let e = out[1 + j] - self.dg[s * d + j];
                d_out[1 + j] = 2.0 * self.weight * e;
                loss += self.weight * e * e;
            }
            loss
        };
        batch_loss(net, &self.x, grad, per_sample)
    }
}

fn batch_loss<F>(net: &Mlp, inputs: &[f64], grad: Option<&mut [f64]>, mut per_sample: F) -> Result<f64>
where
    F: FnMut(usize, &[f64], &mut [f64]) -> f64,
{
    match grad {
        Some(g) => loss_param_grad(net, inputs, g, per_sample),
        None => {
            let n = net.arch().input_dim;
            let b = inputs.len() / n;
            let mut ws = net.workspace();
            let mut d_out = vec![0.0; net.arch().output_dim];
            let mut total = 0.0;
            for s in 0..b {
                let out = net.forward(&inputs[s * n..(s + 1) * n], &mut ws);
                total += per_sample(s, out, &mut d_out);
            }
            let loss = total / b as f64;
            if loss.is_finite() {
                Ok(loss)
            } else {
                Err(Error::NonFinite)
            }
        }
    }
}

/// Learning-rate schedule and iteration counts of one optimization.
struct Schedule {
    step: usize,
    outer: usize,
    inner: usize,
    lr: f64,
    active: Option<Range<usize>>,
}

fn optimize<B, V>(
    net: &mut Mlp,
    schedule: Schedule,
    clamps: &Clamps,
    mut train: B,
    mut validate: V,
) -> Result<StepReport>
where
    B: FnMut(&Mlp, usize, &mut [f64]) -> Result<f64>,
    V: FnMut(&Mlp) -> Result<f64>,
{
    let step = schedule.step;
    let diverged = |iteration: usize| {
        move |e: Error| match e {
            Error::NonFinite => Error::Divergence { step, iteration },
            other => other,
        }
    };
    let mut adam = Adam::new(net.param_count(), schedule.lr);
    if let Some(range) = schedule.active {
        adam = adam.with_active(range);
    }
    let mut controller = LrController::new(schedule.lr);
    let mut grad = vec![0.0; net.param_count()];
    let initial_loss = validate(net).map_err(diverged(0))?;
    let mut rows = Vec::with_capacity(schedule.outer);
    let mut final_loss = initial_loss;
    for outer in 0..schedule.outer {
        for k in 0..schedule.inner {
            let iteration = outer * schedule.inner + k;
            train(net, iteration, &mut grad).map_err(diverged(iteration))?;
            adam.step(net.params_mut(), &grad);
        }
        let end = (outer + 1) * schedule.inner;
        final_loss = validate(net).map_err(diverged(end))?;
        let lr = controller.observe(final_loss);
        adam.set_lr(lr);
        rows.push(LogRow {
            step,
            outer,
            validation_loss: final_loss,
            lr,
            clamps: clamps.count(),
        });
    }
    Ok(StepReport {
        step,
        initial_loss,
        final_loss,
        rows,
    })
}

fn terminal_samples(ctx: &StepContext<'_>, batch: usize, key: StreamKey) -> Result<Vec<f64>> {
    let n = ctx.grid.steps();
    Ok(ctx.transition(n - 1, batch, key)?.x_next)
}

/// Fits `g` alone with a one-output network, for the network-gradient
/// fallback of `Dg`.
fn fit_terminal_value(ctx: &StepContext<'_>, cfg: &SchemeConfig) -> Result<Mlp> {
    let d = ctx.dim();
    let n = ctx.grid.steps();
    let arch = Architecture::new(d, 1, cfg.hidden_layers, cfg.width)?;
    let mut net = Mlp::glorot(arch, cfg.seed ^ 0x5eed_0f_9a11);
    let values = |x: &[f64]| -> Vec<f64> { x.chunks(d).map(|p| ctx.problem.terminal(p)).collect() };
    let val_x = terminal_samples(
        ctx,
        cfg.validation,
        StreamKey::new(cfg.seed, Purpose::Auxiliary, n as u64, u64::MAX),
    )?;
    let val_g = values(&val_x);
    let fit = |net: &Mlp, x: &[f64], g: &[f64], grad: Option<&mut [f64]>| {
        batch_loss(net, x, grad, |s, out, d_out| {
            let r = out[0] - g[s];
            d_out[0] = 2.0 * r;
            r * r
        })
    };
    optimize(
        &mut net,
        Schedule {
            step: n,
            outer: cfg.outer_terminal,
            inner: cfg.inner,
            lr: cfg.lr_terminal,
            active: None,
        },
        &ctx.clamps,
        |net, it, grad| {
            let x = terminal_samples(
                ctx,
                cfg.batch,
                StreamKey::new(cfg.seed, Purpose::Auxiliary, n as u64, it as u64),
            )?;
            let g = values(&x);
            fit(net, &x, &g, Some(grad))
        },
        |net| fit(net, &val_x, &val_g, None),
    )?;
    Ok(net)
}

/// Fits `(U_N, Z_N)` to `(g, Dg)` at maturity.
pub fn train_terminal(ctx: &StepContext<'_>, cfg: &SchemeConfig) -> Result<(Mlp, StepReport)> {
    let d = ctx.dim();
    let n = ctx.grid.steps();
    let arch = Architecture::new(d, d + 1, cfg.hidden_layers, cfg.width)?;
    let dg_net = match cfg.terminal_derivative {
        TerminalDerivative::Analytic => None,
        TerminalDerivative::FittedNetwork => Some(fit_terminal_value(ctx, cfg)?),
    };
    let validation = TerminalData::new(
        ctx,
        terminal_samples(
            ctx,
            cfg.validation,
            StreamKey::new(cfg.seed, Purpose::Validation, n as u64, 0),
        )?,
        dg_net.as_ref(),
    )?;
    let mut net = Mlp::glorot(arch, cfg.seed);
    let report = optimize(
        &mut net,
        Schedule {
            step: n,
            outer: cfg.outer_terminal,
            inner: cfg.inner,
            lr: cfg.lr_terminal,
            active: None,
        },
        &ctx.clamps,
        |net, it, grad| {
            let x = terminal_samples(
                ctx,
                cfg.batch,
                StreamKey::new(cfg.seed, Purpose::Train, n as u64, it as u64),
            )?;
            TerminalData::new(ctx, x, dg_net.as_ref())?.loss(net, Some(grad))
        },
        |net| validation.loss(net, None),
    )?;
    Ok((net, report))
}

/// Regression at step `i < N`, warm-started from `next`.
///
/// In implicit mode the last step (`i = 0`) freezes everything but the
/// output biases and takes the Hessian from `next`: since `X_0 = x0` is
/// deterministic this optimizes the free values `(Y_0, Z_0)`.
pub fn train_step(ctx: &StepContext<'_>, cfg: &SchemeConfig, i: usize, next: &Mlp) -> Result<(Mlp, StepReport)> {
    let (frozen, active) = match (cfg.mode, i) {
        (HessianMode::Explicit, _) => (true, None),
        (HessianMode::Implicit, 0) => (true, Some(next.output_bias_range())),
        (HessianMode::Implicit, _) => (false, None),
    };
    let val_tr = ctx.transition(
        i,
        cfg.validation,
        StreamKey::new(cfg.seed, Purpose::Validation, i as u64, 0),
    )?;
    let validation = StepData::new(ctx, i, next, &val_tr, frozen)?;
    let mut net = next.clone();
    let report = optimize(
        &mut net,
        Schedule {
            step: i,
            outer: cfg.outer_step,
            inner: cfg.inner,
            lr: cfg.lr_step,
            active,
        },
        &ctx.clamps,
        |net, it, grad| {
            let tr = ctx.transition(
                i,
                cfg.batch,
                StreamKey::new(cfg.seed, Purpose::Train, i as u64, it as u64),
            )?;
            StepData::new(ctx, i, next, &tr, frozen)?.loss(ctx, net, Some(grad))
        },
        |net| validation.loss(ctx, net, None),
    )?;
    Ok((net, report))
}

/// Terminal fit followed by the regressions at `i = N−1, …, 0`.
pub fn solve_backward(problem: &dyn Problem, grid: &TimeGrid, cfg: &SchemeConfig) -> Result<SchemeSolution> {
    cfg.validate()?;
    let ctx = StepContext::new(problem, grid, cfg.quantile)?;
    let n = grid.steps();
    let mut networks = Vec::with_capacity(n + 1);
    let mut reports = Vec::with_capacity(n + 1);
    let (net, report) = train_terminal(&ctx, cfg)?;
    networks.push(net);
    reports.push(report);
    for i in (0..n).rev() {
        let (net, report) = train_step(&ctx, cfg, i, networks.last().unwrap())?;
        networks.push(net);
        reports.push(report);
    }
    networks.reverse();
    Ok(SchemeSolution {
        grid: grid.clone(),
        mode: cfg.mode,
        networks,
        reports,
        clamps: ctx.clamps.count(),
    })
}
