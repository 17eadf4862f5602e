//! Keyed deterministic randomness for sensing resolution.
//!
//! Each sensing execution draws from its own ChaCha8 stream keyed by
//! (global seed, round index, action instance), so an outcome depends
//! only on those three values — never on how many draws other actions
//! made before it.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a over the key material.
fn fnv1a(parts: &[&[u8]]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for &b in *part {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    hash
}

/// Stream for one sensing-action execution.
pub fn keyed_rng(seed: u64, round: u32, instance: &str) -> ChaCha8Rng {
    let key = fnv1a(&[
        &seed.to_le_bytes(),
        &round.to_le_bytes(),
        instance.as_bytes(),
    ]);
    ChaCha8Rng::seed_from_u64(key)
}
