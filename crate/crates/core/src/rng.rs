//! Seedable random streams and the index-keyed seed derivation used by sweeps.
//!
//! Every task seed is `task_seed(master, grid, scheme, repetition)`: a chain of
//! SplitMix64 finalizers over the master seed and the three canonical indices.
//! The resulting seed initializes a ChaCha8 stream. Both algorithms are named
//! by [`RNG_ALGO`], which is echoed into every CSV row.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifier of the generator and seed-splitting scheme.
pub const RNG_ALGO: &str = "chacha8+splitmix64";

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `words` into `seed`, one SplitMix64 round per word.
pub fn hash64(seed: u64, words: &[u64]) -> u64 {
    let mut h = splitmix64(seed.wrapping_add(GOLDEN_GAMMA));
    for (k, &w) in words.iter().enumerate() {
        let salt = GOLDEN_GAMMA.wrapping_mul(k as u64 + 2);
        h = splitmix64(h ^ w.wrapping_add(salt));
    }
    h
}

pub fn task_seed(master: u64, grid_index: u64, scheme_index: u64, repetition: u64) -> u64 {
    hash64(master, &[grid_index, scheme_index, repetition])
}

/// A ChaCha8 stream with a recorded seed.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGO
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Child stream seeded from the next output of this one.
    pub fn split(&mut self) -> RandomStream {
        let s = splitmix64(self.inner.next_u64());
        RandomStream::new(s)
    }
}

impl RngCore for RandomStream {
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
