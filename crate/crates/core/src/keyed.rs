//! Randomness keyed by `(seed, entity)` so results never depend on iteration
//! order or thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// A generator whose stream is a pure function of `seed` and the key parts.
pub fn keyed_rng(seed: u64, parts: &[&str]) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for p in parts {
        hasher.update((p.len() as u64).to_le_bytes());
        hasher.update(p.as_bytes());
    }
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// Picks one of `options` uniformly, keyed on `(seed, key)`.
///
/// `options` must be sorted by the caller so the pick is independent of the
/// order in which candidates were discovered.
pub fn keyed_choice<'a, T>(seed: u64, key: &str, options: &'a [T]) -> Option<&'a T> {
    if options.is_empty() {
        return None;
    }
    let mut rng = keyed_rng(seed, &["choice", key]);
    Some(&options[rng.random_range(0..options.len())])
}
