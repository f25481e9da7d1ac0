//! Keyed random draws for trajectories.
//!
//! Each draw is addressed by (seed, trajectory index, step, purpose): the
//! ChaCha stream id is the trajectory index and the word position encodes
//! step and purpose. Results are therefore independent of scheduling and any
//! draw can be regenerated in isolation.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// What a draw is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Purpose {
    JumpThreshold = 0,
    Channel = 1,
    InitialMeasurement = 2,
    FinalMeasurement = 3,
}

const PURPOSES: u128 = 4;
/// 32-bit words reserved per draw.
const WORDS_PER_DRAW: u128 = 2;

#[derive(Debug, Clone)]
pub struct StreamRng {
    core: ChaCha12Rng,
}

impl StreamRng {
    pub fn new(seed: u64, trajectory: u64) -> Self {
        let mut core = ChaCha12Rng::seed_from_u64(seed);
        core.set_stream(trajectory);
        StreamRng { core }
    }

    /// Uniform variate in the open interval (0, 1).
    pub fn uniform(&mut self, step: u64, purpose: Purpose) -> f64 {
        let slot = step as u128 * PURPOSES + purpose as u128;
        self.core.set_word_pos(slot * WORDS_PER_DRAW);
        self.core.sample(Open01)
    }
}
