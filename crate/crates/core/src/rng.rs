//! Deterministic random streams.
//!
//! Every run draws from a ChaCha8 stream (`rand_chacha::ChaCha8Rng`) seeded
//! through `SeedableRng::seed_from_u64`. Monte-Carlo run `k` of a batch with
//! master seed `m` uses the per-run seed `mix_seed(m, k)`, where `mix_seed` is
//! the SplitMix64 finalizer applied to `m + (k + 1) * 0x9E37_79B9_7F4A_7C15`
//! (wrapping arithmetic). Uniform draws take the top 53 bits of `next_u64`
//! scaled by 2^-53, giving values in `[0, 1)`.
//!
//! These three rules together are the stream contract: any implementation
//! that follows them reproduces the same rework draws bit for bit.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function (Steele, Lea & Flood).
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for run `index` of a batch started from `master`.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Seeded uniform source used by the run layer.
#[derive(Debug, Clone)]
pub struct UniformSource {
    inner: ChaCha8Rng,
}

impl UniformSource {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Next draw in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
