//! Counter-based seeding. Every random quantity in a trial is a pure function
//! of `(master seed, trial index, purpose tag, counters)`, so results do not
//! depend on query order or on how trials are spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Key of an independent stream derived from `seed` and `tag`.
#[inline]
pub fn derive(seed: u64, tag: u64) -> u64 {
    mix64(mix64(seed ^ GOLDEN).wrapping_add(tag.wrapping_mul(GOLDEN)) ^ 0xD6E8_FEB8_6659_FD93)
}

/// Element `counter` of the SplitMix64 stream with state `key`.
#[inline]
pub fn counter_u64(key: u64, counter: u64) -> u64 {
    mix64(key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Uniform on (0, 1], never zero so `-ln` stays finite.
#[inline]
pub fn unit_open(x: u64) -> f64 {
    ((x >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn trial_seed(master: u64, trial: u64) -> u64 {
    derive(master, trial)
}

/// Sequential generator for per-trial side randomness (messages, states,
/// channel noise). Kept separate from the race streams.
pub fn aux_rng(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, tag))
}

/// Purpose tags.
pub mod tag {
    pub const AUX: u64 = 0xA0;
    pub const PROC0: u64 = 0xB0;
    pub const PROC1: u64 = 0xB1;
    pub const PROC2: u64 = 0xB2;
}
