//! Reproducible Gaussian increments: one ChaCha8 stream per particle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Purpose tags live in the top byte of a stream id so that, for example,
/// initial positions and forward increments never share a stream.
pub mod purpose {
    pub const INIT: u64 = 1;
    pub const FORWARD: u64 = 2;
    pub const BACKWARD: u64 = 3;
    pub const LIPSCHITZ: u64 = 4;
    pub const BROWNIAN: u64 = 5;
}

/// Stream id for particle `index` used for `purpose`.
pub fn stream_id(purpose: u64, index: u64) -> u64 {
    debug_assert!(index < 1 << 56);
    (purpose << 56) | index
}

/// Counter-based stream: `(seed, stream_id, counter)` fixes every later draw,
/// on any platform.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RandomStream { seed, stream_id, rng }
    }

    /// Stream positioned at a given word counter.
    pub fn at(seed: u64, stream_id: u64, counter: u128) -> Self {
        let mut s = RandomStream::new(seed, stream_id);
        s.rng.set_word_pos(counter);
        s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen()
    }
}
