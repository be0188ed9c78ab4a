use alloc::string::String;

/// Errors produced by the solver core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch: expected length {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },
    #[error("argument outside the domain of {0}")]
    Domain(&'static str),
    /// A loss, gradient or parameter became non-finite. `step` is the time
    /// step being optimized and `iteration` the inner iteration counter.
    #[error("training diverged at time step {step}, iteration {iteration}")]
    Divergence { step: usize, iteration: usize },
    #[error("non-finite value in loss or gradient")]
    NonFinite,
    #[error("simulated state became non-finite at time step {step}")]
    SimulationBlowup { step: usize },
    #[error("riccati mesh too coarse: halving the step moved K(0) by {0:e}")]
    CoarseMesh(f64),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
