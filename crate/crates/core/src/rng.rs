//! Seeded generators.
//!
//! Every random choice in the toolkit goes through [`SeededRng`]
//! (ChaCha8). Sub-seeds for independent jobs are derived with
//! [`derive_seed`] so results do not depend on the order in which jobs
//! are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

/// Name and version of the generator, recorded in run manifests.
pub const RNG_NAME: &str = "chacha8-rand_chacha-0.3";

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a, 64 bit. Stable across platforms and releases.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Mix a base seed with a string key and an integer salt.
pub fn derive_seed(base: u64, key: &str, salt: u64) -> u64 {
    splitmix64(splitmix64(base ^ fnv1a(key.as_bytes())) ^ salt)
}
