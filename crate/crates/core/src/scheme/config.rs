use alloc::format;

use num_traits::Float;

use crate::problem::Problem;
use crate::{Error, Result};

/// Source of the Hessian plugged into the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HessianMode {
    /// `Γ̂ = DẐ_{i+1}(T(X_{t_{i+1}}))`, taken from the frozen next network.
    #[default]
    Explicit,
    /// `Γ̂ = DZ_i(T(X_{t_i}); θ)`, differentiated through the trained network.
    Implicit,
}

/// Source of `Dg` in the terminal fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TerminalDerivative {
    /// The problem's analytic gradient.
    #[default]
    Analytic,
    /// Input gradient of an auxiliary network fitted to `g`.
    FittedNetwork,
}

/// Training protocol of the backward scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub mode: HessianMode,
    pub batch: usize,
    pub validation: usize,
    pub inner: usize,
    pub outer_terminal: usize,
    pub outer_step: usize,
    pub lr_terminal: f64,
    pub lr_step: f64,
    /// Truncation quantile; `None` disables truncation.
    pub quantile: Option<f64>,
    pub hidden_layers: usize,
    pub width: usize,
    pub terminal_derivative: TerminalDerivative,
    pub seed: u64,
}

impl SchemeConfig {
    /// Full protocol: batches of 1000, 10000 validation paths, 40 inner
    /// iterations per outer iteration, 200 outer iterations at maturity and
    /// 100 elsewhere, learning rates 1e-2 then 1e-3. Quantile and network
    /// shape come from the problem.
    pub fn for_problem(problem: &dyn Problem) -> Self {
        let (hidden_layers, width) = problem.default_architecture();
        Self {
            mode: HessianMode::Explicit,
            batch: 1000,
            validation: 10_000,
            inner: 40,
            outer_terminal: 200,
            outer_step: 100,
            lr_terminal: 1e-2,
            lr_step: 1e-3,
            quantile: problem.default_quantile(),
            hidden_layers,
            width,
            terminal_derivative: TerminalDerivative::Analytic,
            seed: 0,
        }
    }

    /// Multiplies outer-iteration counts and batch sizes by `factor`,
    /// rounding up.
    pub fn scaled(mut self, factor: f64) -> Self {
        let scale = |n: usize| ((n as f64 * factor).ceil() as usize).max(1);
        self.batch = scale(self.batch);
        self.validation = scale(self.validation);
        self.outer_terminal = scale(self.outer_terminal);
        self.outer_step = scale(self.outer_step);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("batch", self.batch),
            ("validation", self.validation),
            ("inner", self.inner),
            ("outer_terminal", self.outer_terminal),
            ("outer_step", self.outer_step),
            ("hidden_layers", self.hidden_layers),
            ("width", self.width),
        ];
        for (name, n) in counts {
            if n == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        for lr in [self.lr_terminal, self.lr_step] {
            if !(lr > 0.0) || !lr.is_finite() {
                return Err(Error::Config("learning rates must be positive".into()));
            }
        }
        if let Some(p) = self.quantile {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Config(format!("quantile {p} outside (0, 1)")));
            }
        }
        Ok(())
    }
}
