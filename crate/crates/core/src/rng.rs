//! Seeded random streams.
//!
//! Every randomized procedure takes a `&mut Stream`. Parallel work derives
//! one stream per task index from a master seed, so aggregate results do
//! not depend on how many workers ran the tasks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Stream for a master seed.
pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream number `index` under `seed`.
pub fn derived(seed: u64, index: u64) -> Stream {
    let mut s = ChaCha8Rng::seed_from_u64(seed);
    s.set_stream(index);
    s
}
