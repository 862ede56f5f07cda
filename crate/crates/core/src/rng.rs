//! Per-episode random streams.
//!
//! Every stream is a pure function of `(master_seed, episode_index, stream)`,
//! so episodes can be generated in any order or in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

/// Stream feeding episode generation (objects, assignment, context).
pub const STREAM_EPISODE: u64 = 0;
/// Stream used by the environment for sampled trial binarization.
pub const STREAM_TRIALS: u64 = 1;
/// Stream handed to agents.
pub const STREAM_AGENT: u64 = 2;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master_seed: u64, episode_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(episode_index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

pub fn seeded_rng(master_seed: u64, episode_index: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, episode_index));
    rng.set_stream(stream);
    rng
}
