//! Seeded random streams.
//!
//! Every Monte-Carlo replicate draws from its own ChaCha stream derived from
//! the experiment seed and a replicate identifier, so replicates are
//! reproducible one by one and can run in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Independent generator for replicate `stream` of the experiment `seed`.
pub fn replicate_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream identifier for a labelled sub-experiment, e.g. one grid cell.
///
/// Labels occupy the high 24 bits so that replicate indices never collide.
pub fn stream_id(label: u64, replicate: u64) -> u64 {
    debug_assert!(replicate < (1 << 40));
    (label << 40) | replicate
}
