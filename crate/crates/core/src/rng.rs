//! Portable seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by `seed` (expanded with
//! `SeedableRng::seed_from_u64`) and positioned on the ChaCha stream
//! `stream_id`. ChaCha output is specified independently of the host, so a
//! given `(seed, stream_id)` produces the same sequence on every platform.
//!
//! Monte-Carlo trials derive their streams from `(experiment_seed,
//! trial_index)`; see [`RngStream::for_trial`].

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Which consumer of randomness a trial stream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamLane {
    /// Reward draws from the environment.
    Rewards = 0,
    /// Randomised decisions of the policy (sampling, tie-breaking).
    Policy = 1,
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            inner,
        }
    }

    /// Stream for one lane of trial `trial_index`: stream id `2 * trial_index + lane`.
    pub fn for_trial(seed: u64, trial_index: u64, lane: StreamLane) -> Self {
        RngStream::new(seed, trial_index.wrapping_mul(2).wrapping_add(lane as u64))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // Lemire's multiply-shift with rejection keeps the draw unbiased.
        let n = n as u64;
        loop {
            let x = self.inner.next_u64();
            let m = (x as u128) * (n as u128);
            let low = m as u64;
            if low >= n || low >= n.wrapping_neg() % n {
                return (m >> 64) as usize;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
