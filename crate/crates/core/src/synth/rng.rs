//! Splittable seed streams.
//!
//! A [`SeedStream`] is a 64-bit key that can be forked by name or index.
//! Each stochastic decision draws from its own fork, so inserting a new
//! step never shifts the values drawn by earlier ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream(u64);

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream(splitmix64(seed))
    }

    pub fn key(self) -> u64 {
        self.0
    }

    pub fn named(self, name: &str) -> Self {
        SeedStream(splitmix64(self.0 ^ fnv1a(name.as_bytes())))
    }

    pub fn index(self, i: u64) -> Self {
        SeedStream(splitmix64(self.0.rotate_left(17) ^ splitmix64(i)))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}
