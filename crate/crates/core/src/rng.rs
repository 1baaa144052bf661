//! Seeded random streams.
//!
//! Every random quantity in the crate comes from a `ChaCha8Rng` seeded with a
//! 64-bit value. Parallel work never shares a generator: replication `r` of a
//! run with master seed `m` uses `derive_seed(m, r)`, so results do not depend
//! on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 output function, used as the substream hash.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of substream `index` under `master`: `master ^ splitmix64(index)`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    master ^ splitmix64(index)
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
