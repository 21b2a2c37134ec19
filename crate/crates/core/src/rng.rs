//! Seeded random streams. Sample `i` of a run seeded with `s` always uses
//! stream `i` of the ChaCha generator keyed by `s`, so output does not depend
//! on how samples are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn master(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}
