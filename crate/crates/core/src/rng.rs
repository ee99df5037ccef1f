//! Seed derivation and the simulator's random source.
//!
//! Every stochastic component draws from a [`SimRng`] seeded through
//! [`derive_seed`], so a trial's randomness is a pure function of the root
//! seed and a path of stream labels (trial index, origin, block type, miner).
//! Worker scheduling therefore never changes what a trial sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream labels used when splitting a trial seed.
pub mod stream {
    pub const HONEST: u64 = 0x484f_4e45;
    pub const ADVERSARY: u64 = 0x4144_5645;
    pub const SCHEDULE: u64 = 0x5343_4844;
    pub const PILOT: u64 = 0x5049_4c54;
    pub const AUX: u64 = 0x4155_5800;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `root` along `path`. Distinct paths give
/// statistically unrelated seeds; the same path always gives the same seed.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(root), |acc, &label| splitmix64(acc ^ splitmix64(label)))
}

/// Seed for trial `index` under `root`.
pub fn trial_seed(root: u64, index: u64) -> u64 {
    derive_seed(root, &[index])
}

pub fn rng_from(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
