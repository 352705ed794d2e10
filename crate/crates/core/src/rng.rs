//! Seeded random streams.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded
//! with `seed_from_u64` and split by ChaCha stream id: noise injection reads
//! stream [`NOISE_STREAM`], the swarm reads [`PSO_STREAM`]. A single user seed
//! therefore drives both without the two sequences overlapping.
//!
//! Batch runs derive one seed per job with [`derive_seed`]; job 0 keeps the
//! master seed unchanged.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const NOISE_STREAM: u64 = 0;
pub const PSO_STREAM: u64 = 1;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for the `index`-th job of a batch driven by `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    master ^ index.wrapping_mul(GOLDEN_GAMMA)
}
