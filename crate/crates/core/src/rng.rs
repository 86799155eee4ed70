//! Deterministic random number generation.
//!
//! Every randomized ingredient (perturbed initial shapes, seeded local-search
//! starts, random test masks) draws from a ChaCha8 stream keyed by a single
//! `u64` seed, so identical configurations reproduce identical outputs on any
//! platform.

pub use rand_chacha::ChaCha8Rng;

use rand::{Rng, SeedableRng};

/// A ChaCha8 generator seeded from a single integer.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in [lo, hi).
pub fn uniform(gen: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    gen.gen_range(lo..hi)
}
