//! Counter-based random streams.
//!
//! Every trajectory draws from its own ChaCha8 stream. The key is built from
//! `(run seed, purpose, time step, iteration)` and the stream id is the
//! trajectory index, so a batch is reproducible regardless of how samples are
//! distributed between workers.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::special::inverse_normal_cdf;

/// What a stream of random numbers is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Train = 2,
    Validation = 3,
    Paths = 4,
    MonteCarlo = 5,
    Auxiliary = 6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub purpose: Purpose,
    pub step: u64,
    pub iteration: u64,
}

impl StreamKey {
    pub fn new(seed: u64, purpose: Purpose, step: u64, iteration: u64) -> Self {
        Self {
            seed,
            purpose,
            step,
            iteration,
        }
    }

    pub fn stream(&self, trajectory: u64) -> Stream {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&(self.purpose as u64).to_le_bytes());
        key[16..24].copy_from_slice(&self.step.to_le_bytes());
        key[24..32].copy_from_slice(&self.iteration.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(trajectory);
        Stream { rng }
    }
}

pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    /// Uniform draw in the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        let bits = self.rng.next_u64() >> 11;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw by inversion of a uniform.
    pub fn normal(&mut self) -> f64 {
        // uniform() never returns 0 or 1
        inverse_normal_cdf(self.uniform()).unwrap_or(0.0)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

/// SplitMix64 finalizer: a bijection on `u64`.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of run `index` within an experiment. Injective in `index` for a fixed
/// master seed.
pub fn run_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}
