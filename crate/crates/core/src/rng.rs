//! Seed derivation and named random streams.
//!
//! Every generator is ChaCha8 (`rand_chacha::ChaCha8Rng`) keyed by
//! `seed_from_u64(seed)` and positioned on a 64-bit stream id, so a
//! `(seed, stream)` pair names one reproducible sequence. Seeds are derived
//! with the SplitMix64 finalizer and labels are hashed with 64-bit FNV-1a;
//! both are fixed algorithms, independent of the Rust toolchain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream used to draw the attraction model of a trial.
pub const MODEL_STREAM: u64 = 1;
/// Stream used for user feedback; shared by every policy of a trial.
pub const FEEDBACK_STREAM: u64 = 2;
/// Stream owned by a policy for its internal coin flips.
pub const POLICY_STREAM: u64 = 3;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn stream(seed: u64, stream_id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Seed shared by everything in one trial (model draw, feedback).
pub fn trial_seed(base_seed: u64, trial: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(trial))
}

/// `base_seed ^ hash(policy, trial)`.
pub fn policy_seed(base_seed: u64, policy_label: &str, trial: u64) -> u64 {
    base_seed ^ splitmix64(fnv1a(policy_label.as_bytes()) ^ splitmix64(trial))
}
