//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit `&mut impl Rng`. Library entry
//! points that own a stream build a [`ChainRng`] from a 64-bit seed, and
//! sub-streams are derived by mixing identifiers into the parent seed so that
//! results never depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ChainRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> ChainRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable mixing of a base seed with a list of identifiers.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// A seed drawn from system entropy, for runs that did not pin one.
pub fn entropy_seed() -> u64 {
    rand::random()
}
