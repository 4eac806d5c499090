//! Seeded, individually addressable random streams.
//!
//! Stream `r` of seed `s` is `ChaCha8Rng::seed_from_u64(s)` with its stream
//! counter set to `r`, so replicate `r` can be regenerated without touching
//! any other replicate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Human-readable description recorded in run manifests.
pub const GENERATOR: &str = "ChaCha8Rng::seed_from_u64(seed), set_stream(replicate)";

pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
