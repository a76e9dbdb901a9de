//! Deterministic stream derivation from a single root seed.
//!
//! Every stochastic subtask (network init, minibatch draws, walk noise,
//! subsampling, ...) pulls its own independent stream derived from the root
//! seed and a path of integer tags. Streams do not depend on execution order,
//! so parallel runs reproduce the sequential results exactly.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold a tag path into the root seed.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    let mut s = splitmix64(root);
    for &tag in path {
        s = splitmix64(s ^ splitmix64(tag));
    }
    s
}

/// Stream cipher RNG for the given (root, path) pair.
pub fn stream(root: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, path))
}

/// Well-known tags so subtasks never collide by accident.
pub mod tag {
    pub const NET_INIT: u64 = 1;
    pub const NET_BATCH: u64 = 2;
    pub const NET_NOISE: u64 = 3;
    pub const NET_EVAL: u64 = 4;
    pub const CHAIN: u64 = 5;
    pub const STABILITY: u64 = 6;
    pub const SUBSAMPLE: u64 = 7;
    pub const NOISE_SCAN: u64 = 8;
    pub const SCAN: u64 = 9;
    pub const TOY: u64 = 10;
}
