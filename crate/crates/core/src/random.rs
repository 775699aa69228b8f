//! Seeded random streams.
//!
//! Every logical task (one chain, one bootstrap resample, one replication)
//! draws from its own ChaCha stream addressed by `(master_seed, stream_id)`,
//! so results do not depend on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Address of one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub const fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Derives the `index`-th sub-stream of this stream.
    ///
    /// The child's master seed is a hash of both parent fields, so children
    /// of different parents never share a key.
    pub fn child(&self, index: u64) -> SeedSpec {
        let master = splitmix64(self.master_seed ^ splitmix64(self.stream_id.wrapping_add(0x6a09_e667_f3bc_c909)));
        SeedSpec::new(master, index)
    }
}

impl Default for SeedSpec {
    fn default() -> Self {
        Self::new(0, 0)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs `f` inside a dedicated rayon pool with `workers` threads.
///
/// `None` or `Some(0)` uses the global pool.
pub fn with_workers<T, F>(workers: Option<usize>, f: F) -> T
where
    F: FnOnce() -> T + Send,
    T: Send,
{
    match workers {
        Some(w) if w > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .expect("failed to build thread pool")
            .install(f),
        _ => f(),
    }
}
