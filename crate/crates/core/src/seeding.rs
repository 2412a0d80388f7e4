//! Seeded random streams. Every randomized component draws from its own
//! ChaCha stream derived from one master seed, so adding draws in one place
//! never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    NetInit = 0,
    Collocation = 1,
    Instance = 2,
    Noise = 3,
    Sampling = 4,
}

pub fn rng_for(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
