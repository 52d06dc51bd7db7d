//! Deterministic RNG streams.
//!
//! A tuple's randomness is a pure function of `(global_seed, row_index)`:
//! the pair is mixed into a row seed, and independent consumers of one row
//! (synthesis, background choice) read separate ChaCha streams of that seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream used by tuple synthesis and the baseline generators.
pub const SYNTHESIS_STREAM: u64 = 0;
/// Stream used to pick the hole-filling background image.
pub const BACKGROUND_STREAM: u64 = 1;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for row `row` of a run seeded with `global_seed`.
pub fn row_seed(global_seed: u64, row: u64) -> u64 {
    splitmix64(splitmix64(global_seed) ^ row)
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
