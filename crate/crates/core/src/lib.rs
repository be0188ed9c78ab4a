//! Deep backward scheme for fully nonlinear parabolic PDEs.
//!
//! The crate solves equations of the form
//!
//! ```text
//! ∂ₜu + f(t, x, u, Dₓu, Dₓ²u) = 0   on [0, T) × ℝᵈ,      u(T, ·) = g
//! ```
//!
//! by backward induction on a time grid. At every grid node a single dense
//! network with `1 + d` outputs approximates the pair `(u, Dₓu)`; the Hessian
//! entering the nonlinearity is obtained by differentiating the gradient head
//! of the network trained at the following node (explicit mode) or of the
//! network being trained (implicit mode).
//!
//! The crate is `no_std` and only needs `alloc`. IO, configuration files and
//! the command line live in the companion `dbs-harness` crate.
//!
//! Module map:
//!
//! - [`nn`]: networks, exact input Jacobians, parameter gradients, Adam and the
//!   plateau learning-rate controller.
//! - [`sde`], [`truncation`], [`rng`], [`special`]: time grids, Euler paths,
//!   Gaussian sampling and truncation operators.
//! - [`problem`] and [`problems`]: the problem interface and the benchmark
//!   problems.
//! - [`oracles`]: reference solutions.
//! - [`scheme`]: the backward driver.

#![no_std]
// Whenever std is linked into the build (tests, std dependents), its inherent
// float methods shadow the libm-backed `Float` trait the numeric modules import.
#![allow(unused_imports)]

extern crate alloc;

mod error;
pub mod linalg;
pub mod nn;
pub mod oracles;
pub mod problem;
pub mod problems;
pub mod rng;
pub mod scheme;
pub mod sde;
pub mod special;
pub mod truncation;

pub use error::{Error, Result};
pub use nn::{Adam, Architecture, LrController, Mlp};
pub use problem::{Clamps, Dynamics, Jet, Problem};
pub use problems::registry::{build_problem, ProblemOptions, PROBLEM_NAMES};
pub use scheme::{solve_backward, HessianMode, SchemeConfig, SchemeSolution};
pub use sde::{PathBatch, TimeGrid};
pub use truncation::{Truncation, TruncationKind};
