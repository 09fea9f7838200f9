//! Seeded random streams.
//!
//! Every randomized operation takes an integer seed. Independent consumers of
//! the same seed use distinct ChaCha stream ids so their draws never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub mod stream {
    pub const UEC_POSITIONS: u64 = 1;
    pub const UED_POSITIONS: u64 = 2;
    /// Shadowing for transmitter `i` uses `SHADOWING_BASE + i`.
    pub const SHADOWING_BASE: u64 = 1 << 32;
    pub const FADING: u64 = 3;
    pub const LEARNING: u64 = 4;
    pub const POTENTIAL_EVAL: u64 = 5;
    pub const ORACLE: u64 = 6;
}

pub fn seeded(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
