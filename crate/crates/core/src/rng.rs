//! Counter-based random streams.
//!
//! A stream is a ChaCha8 keystream keyed by `(seed, domain)` and selected by a
//! 64-bit stream id, normally the global sample index. The words drawn for a
//! sample therefore depend only on `(seed, domain, index)` and never on which
//! worker produced them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags separating the independent uses of one user seed.
pub mod domain {
    pub const SAMPLER: u64 = 0x5341_4d50_4c45_0000;
    pub const NOISE: u64 = 0x4e4f_4953_4500_0000;
    pub const THINNING: u64 = 0x5448_494e_0000_0000;
}

/// Key material for a family of counter-based streams.
#[derive(Debug, Clone)]
pub struct StreamKey {
    base: ChaCha8Rng,
}

impl StreamKey {
    /// `domain` separates uses; `salt` separates e.g. qubit counts.
    pub fn new(seed: u64, domain: u64, salt: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&domain.to_le_bytes());
        key[16..24].copy_from_slice(&salt.to_le_bytes());
        Self {
            base: ChaCha8Rng::from_seed(key),
        }
    }

    /// Fresh generator positioned at the start of stream `id`.
    #[inline]
    pub fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(id);
        rng.set_word_pos(0);
        rng
    }
}

/// SplitMix64 finaliser; a cheap keyed hash used for deterministic thinning.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
