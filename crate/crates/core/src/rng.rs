//! Seed derivation.
//!
//! One user seed is split into labelled phase seeds, and each phase draws
//! per-index streams, so any item's randomness depends only on
//! `(seed, label, index)` and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finaliser.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Phase seed for `label` (FNV-1a of the label, mixed with the seed).
pub fn derive(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    mix(seed ^ mix(h))
}

#[inline]
pub fn indexed(seed: u64, index: u64) -> u64 {
    mix(seed ^ mix(index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

/// Independent generator for item `index` of phase `label`.
pub fn stream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(indexed(derive(seed, label), index))
}

/// Uniform in `[0, 1)` from a counter, 53 bits of precision.
#[inline]
pub fn unit(seed: u64, index: u64) -> f64 {
    (indexed(seed, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
