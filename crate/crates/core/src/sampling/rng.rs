//! Seeded random streams.
//!
//! Every stochastic step in the crate draws from [`Rng`], a ChaCha8 stream
//! keyed by a 64-bit seed. The seed is expanded to the 256-bit ChaCha key by
//! `SeedableRng::seed_from_u64` (PCG32 expansion, fixed by `rand_core`), and
//! uniforms are produced from the top 53 bits of each 64-bit output, so the
//! stream is identical on every platform.
//!
//! Seeds for sub-streams (one per transference node, per repetition, ...)
//! are derived with [`derive_seed`], a SplitMix64 finalizer over the parent
//! seed and a list of integer labels.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    /// Uniform on `[0, 1)` with 53 random bits; the smallest positive value
    /// is `2^-53`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * INV_2_53
    }

    /// `+1` or `-1` with equal probability.
    #[inline]
    pub fn sign(&mut self) -> i8 {
        if self.next_u64() >> 63 == 0 {
            1
        } else {
            -1
        }
    }

    /// Bernoulli draw returning `true` with probability `p` (clamped to [0, 1]).
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

/// Smallest positive value [`Rng::uniform`] can produce.
pub const SMALLEST_UNIFORM: f64 = INV_2_53;

#[inline]
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent child seed from `seed` and a label path.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(seed), |acc, &l| splitmix64(acc ^ splitmix64(l)))
}
