//! Backward induction: terminal fit, then one regression per grid interval
//! from maturity down to the origin.

mod config;
mod step;
mod train;

pub use config::{HessianMode, SchemeConfig, TerminalDerivative};
pub use step::{f_tilde, step_map};
pub use train::{
    solve_backward, terminal_weight, train_step, train_terminal, Evaluation, LogRow, SchemeSolution, StepContext,
    StepData, StepReport, TerminalData,
};
