//! Seeded, stream-split randomness.
//!
//! Every random artifact in this crate is a pure function of a `u64` seed and
//! a stream index: we seed a ChaCha8 generator from the seed and select one of
//! its 2^64 independent streams per logical unit of work (one dataset row, one
//! Monte Carlo sample, one trial). That keeps parallel generation bitwise
//! identical to sequential generation regardless of scheduling.
//!
//! Normal variates come from `rand_distr::StandardNormal` (ziggurat method).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Stream reserved for planted-vector generation, away from row indices.
pub const STREAM_PLANTED: u64 = 1 << 62;

/// Stream reserved for direction sampling in cone checks.
pub const STREAM_DIRECTIONS: u64 = (1 << 62) + 1;

/// ChaCha8 generator positioned on `stream` of the given seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives an independent sub-seed from `(seed, salt)`.
///
/// SplitMix64 finalizer over the salted seed; used to give each trial of a
/// multi-trial check its own seed space without overlapping row streams.
pub fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `len` i.i.d. standard normal draws from `rng`.
pub fn standard_normal_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}
