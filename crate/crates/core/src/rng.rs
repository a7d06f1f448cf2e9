//! Seeded random streams.
//!
//! Every stochastic stage derives its generator from a base seed and a
//! stream index (`seed ^ stream`), so a replicate's draws never depend on
//! which thread ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index)
}

/// Mixes two keys into one seed (splitmix64 finalizer), used where a stream
/// is addressed by a pair such as (trial, replicate).
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(b.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
