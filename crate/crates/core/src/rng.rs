//! Seed derivation.
//!
//! Every random draw in a run is keyed by `(master seed, stream, round, ...)`
//! so results do not depend on call order, thread scheduling, or whether the
//! run was resumed from a snapshot.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named random streams of an experiment.
pub mod stream {
    pub const SEED_SET: u64 = 0x5EED;
    pub const TRAIN: u64 = 0x7A11;
    pub const DENSITY: u64 = 0xDE75;
    pub const RANDOM_QUERY: u64 = 0x7A4D;
    pub const ORACLE: u64 = 0x04AC;
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one well-mixed seed.
pub fn derive(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x243F_6A88_85A3_08D3, |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for a per-round stream of an experiment.
pub fn round_seed(master: u64, stream: u64, round: usize) -> u64 {
    derive(&[master, stream, round as u64])
}
