//! Deterministic chance source.
//!
//! Every random decision in the crate is drawn from [`ChanceRng`], a ChaCha8
//! keystream keyed by a 64-bit seed. The seed is expanded to the 256-bit
//! ChaCha key with `rand_core`'s `seed_from_u64` (a PCG32 expansion), and
//! independent sub-streams are selected through ChaCha's 64-bit stream
//! counter. Stream numbers are allocated in [`streams`].
//!
//! Sampling primitives are defined here rather than borrowed from `rand`'s
//! distributions so that sequences stay stable across crate versions and can
//! be reproduced from this description alone:
//!
//! * `next_u64`: the next 64-bit word of the keystream (two 32-bit words,
//!   little-endian).
//! * `coin`: heads iff the most significant bit of `next_u64` is set.
//! * `unit`: `(next_u64 >> 11) * 2^-53`, uniform on `[0, 1)`.
//! * `chance(p)`: `unit() < p`.
//! * `weighted(w)`: `unit() * sum(w)` located on the running cumulative sum.
//! * `below(n)`: `(next_u64 as u128 * n) >> 64`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChanceRng {
    inner: ChaCha8Rng,
}

impl ChanceRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Opens a stream positioned after `draws` calls to [`ChanceRng::next_u64`].
    pub fn at_draw(seed: u64, stream: u64, draws: u64) -> Self {
        let mut rng = Self::new(seed, stream);
        rng.inner.set_word_pos(u128::from(draws) * 2);
        rng
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn below(&mut self, n: u64) -> u64 {
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    /// Index into `weights` drawn proportionally. Zero-weight entries are never
    /// chosen unless every weight is zero, in which case index 0 is returned.
    pub fn weighted(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let target = self.unit() * total;
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, w) in weights.iter().enumerate() {
            if *w <= 0.0 {
                continue;
            }
            acc += w;
            last_positive = i;
            if target < acc {
                return i;
            }
        }
        last_positive
    }
}

/// Stream allocation.
///
/// A session's randomness is partitioned into epochs (an epoch ends at each
/// reset) of [`PER_EPOCH`] streams each. Within an epoch, stream 0 carries the
/// coin tosses, streams 1..=6 the loop layer of the matching line, and stream
/// 7 the ambient rendering.
pub mod streams {
    pub const PER_EPOCH: u64 = 16;
    /// Stream used by the chart-based comparison mode.
    pub const CAGE: u64 = u64::MAX;

    pub fn tosses(epoch: u32) -> u64 {
        u64::from(epoch) * PER_EPOCH
    }

    pub fn layer(epoch: u32, line_index: u8) -> u64 {
        u64::from(epoch) * PER_EPOCH + u64::from(line_index)
    }

    pub fn ambient(epoch: u32) -> u64 {
        u64::from(epoch) * PER_EPOCH + 7
    }
}
