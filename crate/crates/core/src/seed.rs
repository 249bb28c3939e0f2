//! Stable seed derivation.
//!
//! Every random stream in the crate is keyed by *what* it computes (a
//! comparison, a trial), never by when it runs, so results do not depend on
//! thread count or scheduling.

use sha2::{Digest, Sha256};

/// Derives a 64-bit seed from a master seed, a domain tag and a list of
/// labels.
///
/// The digest is SHA-256 over the tag, the little-endian master seed and the
/// length-prefixed labels; the first eight bytes, read little-endian, form
/// the result. It is identical on every platform.
pub fn derive_seed(master: u64, tag: &str, labels: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update((tag.len() as u64).to_le_bytes());
    hasher.update(tag.as_bytes());
    hasher.update(master.to_le_bytes());
    for label in labels {
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
    }
    let digest = hasher.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}
