//! Seeded, splittable random streams.
//!
//! A stream is identified by `(seed, index)`. Each index selects an independent
//! ChaCha12 keystream under the same key, so results never depend on how work
//! is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Number of samples per Monte Carlo block; block `b` draws from stream `b`.
pub const BLOCK_SIZE: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeededStream {
    seed: u64,
    index: u64,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        SeededStream { seed, index: 0 }
    }

    pub fn with_index(seed: u64, index: u64) -> Self {
        SeededStream { seed, index }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Child stream; distinct `(seed, index)` pairs never alias.
    pub fn substream(&self, index: u64) -> Self {
        SeededStream {
            seed: self.seed,
            index,
        }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }
}
