//! Seeded generators. Every run is keyed by an explicit `u64` seed; independent
//! replications use separate ChaCha streams of the same key.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ChainRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> ChainRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for replication `index` derived from `seed`. Streams never overlap.
pub fn replication(seed: u64, index: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Uniform draw on the open interval (0, 1).
pub(crate) fn open_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}
