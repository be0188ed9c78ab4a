//! Reference solutions used to score trained networks.

pub mod closed;
pub mod mc;
pub mod quadrature;
pub mod riccati;
pub mod scott;

pub use closed::{case1_exact, merton_exact, monge_ampere_exact};
pub use mc::{mc_w_estimate, McEstimate};
pub use riccati::{LqParams, RiccatiSolution};
pub use scott::{FactorParams, ScottSolution};
