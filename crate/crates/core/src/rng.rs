//! Seeded random streams. ChaCha8 keeps outcome sequences identical across
//! platforms; separate stream ids keep instance, trial-state and measurement
//! randomness independent for the same seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub const STREAM_INSTANCE: u64 = 1;
pub const STREAM_TRIAL: u64 = 2;
pub const STREAM_MEASURE: u64 = 3;
pub const STREAM_NOISE: u64 = 4;

pub fn stream(seed: u64, id: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
