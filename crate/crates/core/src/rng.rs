//! Seeds and random number generation.
//!
//! Every stochastic operation takes a [`Seed`]. Generators are ChaCha8
//! (`rand_chacha::ChaCha8Rng`), whose output stream is specified independently
//! of platform and word size, seeded through `SeedableRng::seed_from_u64`.
//!
//! Independent sub-streams are derived with [`Seed::derive`]: the stream index
//! is mixed into the parent seed with the SplitMix64 finalizer, so that
//! `seed.derive(i)` and `seed.derive(j)` are unrelated for `i != j`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    pub fn new(value: u64) -> Self {
        Seed(value)
    }

    /// Sub-seed for stream `index`: `splitmix64(seed + (index + 1) * GOLDEN_GAMMA)`.
    pub fn derive(self, index: u64) -> Seed {
        Seed(splitmix64(
            self.0
                .wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)),
        ))
    }

    pub fn rng(self) -> Rng {
        Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}
