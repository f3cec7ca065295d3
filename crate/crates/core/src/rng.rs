//! Seeded random streams.
//!
//! Every consumer gets its own ChaCha8 stream keyed by `(seed, stream id)`, so
//! the price path and the trade feed of one replication never share generator
//! state, and changing how many draws one of them makes leaves the other
//! untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const PRICE_STREAM: u64 = 1;
pub const FEED_STREAM: u64 = 2;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
