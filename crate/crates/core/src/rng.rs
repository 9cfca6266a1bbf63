//! Counter-based random streams.
//!
//! Every random draw in a sweep comes from a stream keyed by its position in
//! the experiment (seed, drop, realization, link), never from shared state,
//! so results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type StreamRng = ChaCha12Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hierarchical stream key. Children with distinct labels give
/// statistically independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    state: u64,
    salt: u64,
}

impl StreamKey {
    pub fn root(seed: u64) -> Self {
        Self {
            state: splitmix64(seed),
            salt: splitmix64(seed ^ 0x5EED_5EED_5EED_5EED),
        }
    }

    pub fn child(self, label: u64) -> Self {
        Self {
            state: splitmix64(self.state ^ splitmix64(label.wrapping_add(0xA5A5_A5A5))),
            salt: splitmix64(self.salt.rotate_left(17) ^ label),
        }
    }

    pub fn rng(self) -> StreamRng {
        let mut seed = [0u8; 32];
        let words = [
            self.state,
            self.salt,
            splitmix64(self.state ^ self.salt),
            splitmix64(self.salt.wrapping_add(self.state)),
        ];
        for (chunk, word) in seed.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        StreamRng::from_seed(seed)
    }
}

/// Labels for the streams of one channel realization.
pub mod label {
    pub const UE_DROP: u64 = 1;
    pub const REALIZATION: u64 = 2;
    pub const ACTIVATION: u64 = 3;
    pub const DIRECT_LINK: u64 = 10;
    pub const UE_TO_REPEATER: u64 = 1 << 20;
    pub const REPEATER_TO_BS: u64 = 2 << 20;
}
