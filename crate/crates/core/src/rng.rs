//! Counter-based random draws keyed by `(seed, t, lane)`.
//!
//! Every draw is a pure function of its key, so replays do not depend on
//! the order in which players or periods are evaluated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct CounterRng {
    base: ChaCha8Rng,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { base: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Independent stream for period `t`.
    pub fn stream(&self, t: u64) -> ChaCha8Rng {
        let mut r = self.base.clone();
        r.set_stream(t);
        r
    }

    /// Uniform draw in `[0,1)` for `(t, lane)`.
    pub fn uniform(&self, t: u64, lane: u64) -> f64 {
        let mut r = self.stream(t);
        r.set_word_pos(u128::from(lane) * 16);
        r.gen::<f64>()
    }

    /// Index drawn from the probability vector `p` for `(t, lane)`.
    pub fn categorical(&self, t: u64, lane: u64, p: &[f64]) -> usize {
        let u = self.uniform(t, lane);
        let mut acc = 0.0;
        let mut last = 0;
        for (i, pi) in p.iter().enumerate() {
            if *pi <= 0.0 {
                continue;
            }
            last = i;
            acc += pi;
            if u < acc {
                return i;
            }
        }
        last
    }
}
