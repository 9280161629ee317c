//! Seeded RNG construction and the fixed per-stage seed offsets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a sub-stream index into a seed (splitmix64 finalizer).
pub fn derive(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Offsets added to the run seed for each pipeline stage.
pub mod stage {
    pub const SYNTHESIZE: u64 = 1;
    pub const SPLIT: u64 = 2;
    pub const TRAIN_MLP: u64 = 3;
    pub const TRAIN_TREE: u64 = 4;
    pub const TRAIN_ENSEMBLE: u64 = 5;
    pub const COMPARE: u64 = 6;
    pub const REBALANCE: u64 = 7;
    pub const SIMULATE: u64 = 8;
}
