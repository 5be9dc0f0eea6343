//! Deterministic random streams.
//!
//! A run seed feeds one root generator; independent streams (environment
//! dynamics, exploration, network init, ...) are split from it by ChaCha
//! stream id, so changing how often one stream is consumed never perturbs
//! another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SmrRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Env = 1,
    Explore = 2,
    Init = 3,
    Train = 4,
    Eval = 5,
    Generate = 6,
    Verify = 7,
}

pub fn stream_rng(seed: u64, stream: Stream) -> SmrRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
