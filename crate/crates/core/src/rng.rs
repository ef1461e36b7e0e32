//! Reproducible random streams.
//!
//! All randomness in the crate flows from a single user-visible seed. A
//! stream is a ChaCha8 generator keyed by that seed with a 64-bit stream id;
//! child streams are derived by a fixed splitmix64 rule from the parent's
//! stream id and a child index, never from the parent's consumption state.
//! Parallel workers therefore produce identical results regardless of
//! scheduling, and adding parallelism never changes output.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A seeded, forkable random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl RngStream {
    /// Root stream for a user seed (stream id 0).
    pub fn root(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Stream with an explicit id. Streams with distinct ids are independent.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, seed, stream }
    }

    /// Derive the `index`-th child stream.
    ///
    /// Split rule: `child_id = splitmix64(parent_id ^ (index + 1) * 0x9E3779B97F4A7C15)`.
    pub fn child(&self, index: u64) -> Self {
        let child_id =
            splitmix64(self.stream ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        Self::with_stream(self.seed, child_id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u: f64 = rand::Rng::random(self);
            if u > 0.0 && u < 1.0 {
                return u;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}
