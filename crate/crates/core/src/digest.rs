//! Content digests used for stage staleness checks and request keys.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Hex-encoded SHA-256 of raw bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in out {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Digest of a value's JSON form. Struct field order is fixed by the type,
/// and map-typed fields use ordered maps, so this is stable across runs.
pub fn digest_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable value");
    sha256_hex(&bytes)
}

/// Digest over an ordered list of named component digests.
pub fn combine(parts: &[(&str, &str)]) -> String {
    let mut buf = String::new();
    for (name, digest) in parts {
        buf.push_str(name);
        buf.push('=');
        buf.push_str(digest);
        buf.push('\n');
    }
    sha256_hex(buf.as_bytes())
}
