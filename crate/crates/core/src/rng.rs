//! Seeded, splittable randomness. Every random choice in a session flows from
//! one 64-bit seed so that runs replay bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type SimRng = ChaCha20Rng;

/// Well-known stream ids used when splitting a session seed.
pub mod stream {
    pub const CLIENT: u64 = 1;
    pub const SERVER: u64 = 2;
    pub const ADVERSARY: u64 = 3;
    pub const LAYOUT: u64 = 4;
    pub const TRIALS: u64 = 1 << 32;
}

pub fn seeded(seed: u64) -> SimRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent generator for `(seed, stream)`.
pub fn split(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
