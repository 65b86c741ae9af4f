//! Seed handling. All randomness flows from ChaCha8 streams derived from a
//! user seed and a stream index, so results do not depend on thread count.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of child `index` under `seed`: `mix(seed ^ mix(index + K))` with a
/// fixed odd constant `K`.
pub fn split(seed: u64, index: u64) -> u64 {
    mix(seed ^ mix(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// Independent stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> Rng {
    Rng::seed_from_u64(split(seed, index))
}
