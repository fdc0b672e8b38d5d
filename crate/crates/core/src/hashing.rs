//! Stable, platform-independent hashing.

use sha2::{Digest, Sha256};

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// First eight bytes of the SHA-256 of `bytes`, little endian.
pub fn stable_hash_bytes(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(word)
}

/// Hash of a sequence of integers, stable across runs and platforms.
pub fn stable_hash(parts: &[u64]) -> u64 {
    let mut buf = Vec::with_capacity(parts.len() * 8);
    for p in parts {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    stable_hash_bytes(&buf)
}
