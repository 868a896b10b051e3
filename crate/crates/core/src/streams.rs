//! Deterministic random streams.
//!
//! A stream is identified by a root seed, a path of labels (claim name, buffer
//! size, ...) and a replication index. Child seeds are derived by hashing, so
//! adding a new label never shifts the draws of an existing one, and the
//! replication index selects one of ChaCha's 2^64 independent streams, so
//! results do not depend on how replications are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator handed to every sampling routine.
pub type RandomStream = ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// FNV-1a, used to turn labels into 64-bit keys.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// A node in the seed tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedTree {
    seed: u64,
}

impl SeedTree {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn child(&self, key: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(key)),
        }
    }

    pub fn child_label(&self, label: &str) -> Self {
        self.child(fnv1a(label.as_bytes()))
    }

    /// Generator for replication `index` under this node.
    pub fn stream(&self, index: u64) -> RandomStream {
        replication_stream(self.seed, index)
    }
}

/// Generator for replication `index` of an experiment seeded with `seed`.
pub fn replication_stream(seed: u64, index: u64) -> RandomStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
