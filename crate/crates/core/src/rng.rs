//! Seed derivation.
//!
//! Every random stream is a ChaCha8 generator keyed by
//! `splitmix(seed ⊕ splitmix(stream_id))`, so a worker's stream depends only on
//! the top-level seed and the stream's own id, never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Combines a seed with a stream id into a child seed.
pub fn derive(seed: u64, stream_id: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream_id))
}

/// Independent generator for `stream_id` under `seed`.
pub fn stream(seed: u64, stream_id: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive(seed, stream_id))
}

/// Stream ids used by the library; keeps purposes from colliding.
pub mod purpose {
    pub const INPUT: u64 = 1;
    pub const REPLICATE: u64 = 2;
    pub const BOOTSTRAP: u64 = 3;
    pub const REFERENCE: u64 = 4;
}
