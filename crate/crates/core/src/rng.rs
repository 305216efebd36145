//! The one seeded generator used across the crate: ChaCha8 keyed through
//! `SeedableRng::seed_from_u64`. Independent sub-streams are carved out with
//! ChaCha's stream counter so that draws in one stage never shift another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type AgoraRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> AgoraRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn substream(seed: u64, stream: u64) -> AgoraRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
