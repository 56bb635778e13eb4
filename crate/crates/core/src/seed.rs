//! Reproducible per-trial random streams.
//!
//! A [`SeedSpec`] is the pair `(master_seed, trial_index)`. It is turned into a
//! 256-bit ChaCha8 key as
//!
//! ```text
//! key = master_seed ‖ trial_index ‖ splitmix64(master_seed ^ A) ‖ splitmix64(trial_index ^ B)
//! ```
//!
//! with every word little-endian, `A = 0x6a09e667f3bcc908` and
//! `B = 0xbb67ae8584caa73b`. The first two words carry the pair verbatim, so
//! the map is injective. Independent components of one trial (the GOE draw,
//! the spike, the samples, Haar rotations, ...) read from distinct ChaCha
//! stream ids under the same key, see [`Stream`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const KEY_MIX_MASTER: u64 = 0x6a09_e667_f3bc_c908;
const KEY_MIX_TRIAL: u64 = 0xbb67_ae85_84ca_a73b;

/// Identifies the random stream of a single trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub trial_index: u64,
}

/// Stream ids used under one [`SeedSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Goe = 1,
    Spike = 2,
    Samples = 3,
    HaarSpan = 4,
    HaarComplement = 5,
    Restarts = 6,
    Probe = 7,
}

impl SeedSpec {
    pub const fn new(master_seed: u64, trial_index: u64) -> Self {
        Self { master_seed, trial_index }
    }

    /// Seed for trial `trial` of a size-`n` configuration in a sweep:
    /// `trial_index = n << 32 | trial`. Injective while both fit in 32 bits.
    pub fn grid(master_seed: u64, n: usize, trial: usize) -> Self {
        debug_assert!(n < (1 << 32) && trial < (1 << 32));
        Self::new(master_seed, ((n as u64) << 32) | trial as u64)
    }

    pub fn key(&self) -> [u8; 32] {
        let words = [
            self.master_seed,
            self.trial_index,
            splitmix64(self.master_seed ^ KEY_MIX_MASTER),
            splitmix64(self.trial_index ^ KEY_MIX_TRIAL),
        ];
        let mut key = [0u8; 32];
        for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        key
    }

    pub fn rng(&self, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key());
        rng.set_stream(stream as u64);
        rng
    }
}

/// One round of the SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
