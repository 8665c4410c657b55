//! Seed derivation.
//!
//! Every random stream in an experiment is derived from one root seed. A
//! child seed is `splitmix64(root ^ splitmix64(stream) ^ splitmix64(index + 1) rotated)`,
//! so distinct `(stream, index)` pairs give unrelated sequences and the same
//! triple always gives the same seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags used across the crate.
pub mod stream {
    pub const SYNTHETIC: u64 = 1;
    pub const SPLIT: u64 = 2;
    pub const TRIAL: u64 = 3;
    pub const RETRAIN: u64 = 4;
    pub const SAMPLER: u64 = 5;
    pub const PIPELINE: u64 = 6;
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(root: u64, stream: u64, index: u64) -> u64 {
    splitmix64(root ^ splitmix64(stream) ^ splitmix64(index.wrapping_add(1)).rotate_left(17))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
