//! Seeded, splittable randomness.
//!
//! All stochastic operations in this crate draw from an explicit
//! [`Prng`] handed in by the caller; there is no global RNG. Independent
//! substreams are derived from a single seed via the ChaCha stream
//! parameter, so concurrent jobs can share a master seed without their
//! draws interfering.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The PRNG used throughout the crate.
pub type Prng = ChaCha8Rng;

/// Derive an independent stream from `seed`. Different `stream_id`s on the
/// same seed never overlap.
pub fn stream(seed: u64, stream_id: u64) -> Prng {
    let mut rng = Prng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Mix a master seed with job coordinates into a fresh seed (splitmix64
/// finalization). Used to fan experiment jobs out to workers while keeping
/// results independent of scheduling order.
pub fn mix_seed(master: u64, parts: &[u64]) -> u64 {
    let mut state = master;
    for &p in parts {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(p);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        state = z ^ (z >> 31);
    }
    state
}
