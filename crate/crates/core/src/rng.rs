//! Seeding.
//!
//! Every random draw in the crate comes from ChaCha8 seeded through
//! [`Seed::rng`]. Independent streams (one per replicate, grid cell, window
//! or node pair) are derived from a master seed and the task's indices with
//! a SplitMix64 mix, so results do not depend on execution order or on the
//! number of worker threads.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    /// Seed for the sub-task identified by `path`.
    pub fn derive(self, path: &[u64]) -> Seed {
        let mut h = splitmix64(self.0);
        for &x in path {
            h = splitmix64(h ^ splitmix64(x));
        }
        Seed(h)
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Seed {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(Seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derived_streams_differ_and_are_stable() {
        let s = Seed(7);
        assert_eq!(s.derive(&[1, 2]), s.derive(&[1, 2]));
        assert_ne!(s.derive(&[1, 2]), s.derive(&[2, 1]));
        assert_ne!(s.derive(&[0]), s.derive(&[0, 0]));
        assert_ne!(Seed(7).derive(&[3]), Seed(8).derive(&[3]));
    }

    #[test]
    fn generator_output_is_pinned() {
        // Guards against silent changes in the generator or seeding path.
        let mut rng = Seed(42).rng();
        let first: u64 = rng.random();
        let mut again = Seed(42).rng();
        assert_eq!(first, again.random::<u64>());
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }
}
