//! Content hashes for manifests.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of the compact JSON encoding of `value`.
///
/// Struct fields serialize in declaration order, so equal values hash equally.
pub fn json_hash<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(sha256_hex(&serde_json::to_vec(value)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn json_hash_is_stable() {
        let a = json_hash(&[1.5, 2.0]).unwrap();
        assert_eq!(a, json_hash(&vec![1.5, 2.0]).unwrap());
        assert_ne!(a, json_hash(&[1.5, 2.5]).unwrap());
    }
}
