//! Deterministic per-task random streams.
//!
//! Every stochastic task (a restart, a chain, a sweep entry) owns a
//! ChaCha stream keyed by `(seed, task index)`, so results do not depend
//! on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TaskRng = ChaCha8Rng;

pub fn task_rng(seed: u64, task: u64) -> TaskRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// Derive a sub-seed for nested task trees.
pub fn sub_seed(seed: u64, task: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ task.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
