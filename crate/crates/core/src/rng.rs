//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator whose seed is a
//! pure function of a master seed and a key path (circuit index, shot
//! index, shuffle index, ...). Work items can therefore be evaluated in any
//! order, or concurrently, without changing the stream each one sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and one key component.
pub fn derive(seed: u64, key: u64) -> u64 {
    mix64(
        seed.wrapping_add(GOLDEN)
            .wrapping_add(mix64(key.wrapping_add(GOLDEN))),
    )
}

/// Derives a child seed from a string key (FNV-1a folded through [`derive`]).
pub fn derive_str(seed: u64, key: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    derive(seed, h)
}

/// Generator for stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, 3).random();
        let b: u64 = stream(7, 3).random();
        let c: u64 = stream(7, 4).random();
        let d: u64 = stream(8, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn string_keys_differ() {
        assert_ne!(derive_str(1, "lane0/R0"), derive_str(1, "lane0/R1"));
        assert_eq!(derive_str(1, "x"), derive_str(1, "x"));
    }
}
