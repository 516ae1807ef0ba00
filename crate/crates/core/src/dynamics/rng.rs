//! Reproducible random streams keyed by `(seed, replica, purpose)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose of a random stream; each gets an independent ChaCha stream id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Dynamics = 1,
    /// Times of exchange events, only drawn when an event log is requested.
    EventTimes = 2,
    InitialConfig = 3,
    Coupling = 4,
}

pub fn stream_rng(seed: u64, replica: u64, stream: Stream) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&replica.to_le_bytes());
    key[16..24].copy_from_slice(b"spreadhy");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream as u64);
    rng
}
