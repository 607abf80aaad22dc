//! Seeded randomness.
//!
//! Every stochastic operation takes a [`RandomSource`]. Batch drivers never
//! share one source across selection events; event `k` gets its own stream
//! derived from the batch seed, so serial and parallel execution agree.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Golden-ratio increment used to spread event indices across seed space.
pub const STREAM_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

/// A seeded pseudo-random generator (ChaCha8).
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Seed of the stream for event `index` under `base_seed`:
    /// `base_seed ^ (index * STREAM_MIX)` with wrapping multiplication. The
    /// result is then expanded by ChaCha's `seed_from_u64`.
    pub fn stream_seed(base_seed: u64, index: u64) -> u64 {
        base_seed ^ index.wrapping_mul(STREAM_MIX)
    }

    /// The independent stream for event `index` under `base_seed`.
    pub fn stream(base_seed: u64, index: u64) -> Self {
        Self::new(Self::stream_seed(base_seed, index))
    }

    /// The seed this source was constructed from.
    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
