//! Deterministic seed derivation for independent RNG streams.
//!
//! Every randomized stage derives its own 64-bit seed from the user seed and
//! a list of tags (repetition index, stage id, round index, ...) via
//! SplitMix64, then runs a ChaCha12 stream. Identical seeds and tags give
//! identical draws on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(base ^ 0xA076_1D64_78BD_642F);
    for &t in tags {
        state = splitmix64(state ^ splitmix64(t));
    }
    state
}

pub(crate) fn stream(base: u64, tags: &[u64]) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(base, tags))
}

/// Stage tags used across the pipeline.
pub(crate) mod tag {
    pub const SEEDING_ROUND: u64 = 1;
    pub const CORESET: u64 = 2;
    pub const RESTART: u64 = 3;
    pub const REPETITION: u64 = 4;
}
