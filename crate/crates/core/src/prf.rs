//! Seeded pseudorandom function used for every piece of shared randomness.
//!
//! All public-coin objects (sketch matrices, level hashes, permutations,
//! subsampled index sets) are derived from a 64-bit seed through
//! [`SharedRandomness`], keyed by a domain label and integer coordinates.
//! The mix is a pure integer function, so outputs are identical on every
//! platform.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn label_hash(label: &str) -> u64 {
    // FNV-1a, then one round of mixing
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    mix64(h)
}

/// Seed material from which all shared random objects are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SharedRandomness {
    seed: u64,
}

impl SharedRandomness {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// PRF output for `(seed, label, coords...)`.
    pub fn word(&self, label: &str, coords: &[u64]) -> u64 {
        let mut h = mix64(self.seed ^ label_hash(label));
        for (idx, &c) in coords.iter().enumerate() {
            h = mix64(h.wrapping_add(GOLDEN.wrapping_mul(idx as u64 + 1)) ^ c);
            h = mix64(h.wrapping_add(GOLDEN));
        }
        h
    }

    /// A child seed for an independent sub-object.
    pub fn derive(&self, label: &str, coords: &[u64]) -> SharedRandomness {
        SharedRandomness::new(self.word(label, coords))
    }

    /// Uniform value in `[0, bound)` via a 128-bit multiply.
    pub fn below(&self, label: &str, coords: &[u64], bound: u64) -> u64 {
        debug_assert!(bound > 0);
        ((u128::from(self.word(label, coords)) * u128::from(bound)) >> 64) as u64
    }

    /// A ChaCha stream seeded from `(seed, label, coords...)`, for
    /// sequential sampling such as shuffles.
    pub fn rng(&self, label: &str, coords: &[u64]) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        for (chunk_idx, chunk) in key.chunks_mut(8).enumerate() {
            let w = self.word(label, &[coords_fold(coords), chunk_idx as u64]);
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

fn coords_fold(coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(0x1234_5678_9ABC_DEF0, |acc, &c| mix64(acc ^ c).wrapping_add(GOLDEN))
}

/// Hash of an arbitrary byte string, keyed by a seed. Used where a stub
/// protocol needs "fresh" randomness that is still a pure function of its
/// inputs.
pub fn hash_bytes(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = mix64(seed ^ 0xA076_1D64_78BD_642F);
    for chunk in bytes.chunks(8) {
        let mut buf = [0u8; 8];
        buf[..chunk.len()].copy_from_slice(chunk);
        h = mix64(h ^ u64::from_le_bytes(buf)).wrapping_add(GOLDEN);
    }
    mix64(h ^ bytes.len() as u64)
}
