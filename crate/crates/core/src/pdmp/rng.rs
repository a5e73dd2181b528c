//! Random streams.
//!
//! Stream derivation rule: replicate `r` of a run seeded with `seed` uses
//! `ChaCha8Rng::seed_from_u64(seed)` switched to stream `r`. Streams are
//! independent of each other and of the worker that consumes them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64, replicate: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Exponential waiting time with the given rate (`+∞` for rate 0).
#[inline]
pub fn exponential(rng: &mut Stream, rate: f64) -> f64 {
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    let e: f64 = rng.sample(Exp1);
    e / rate
}

/// Index drawn with probability proportional to `weights`, whose sum is `total`.
#[inline]
pub fn categorical(rng: &mut Stream, weights: &[f64], total: f64) -> usize {
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (j, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = j;
        if u < acc {
            return j;
        }
    }
    last
}
