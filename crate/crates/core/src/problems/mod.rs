//! Benchmark problems.

pub mod case1;
pub mod lq;
pub mod merton;
pub mod monge_ampere;
pub mod portfolio;
pub mod registry;

pub use case1::Case1;
pub use lq::LinearQuadratic;
pub use merton::Merton;
pub use monge_ampere::MongeAmpere;
pub use portfolio::{ParameterSet, Portfolio};

use alloc::vec;
use alloc::vec::Vec;

fn scaled_identity(d: usize, s: f64) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for j in 0..d {
        m[j * d + j] = s;
    }
    m
}
