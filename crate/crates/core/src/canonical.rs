//! Canonical JSON: compact `serde_json` output of types whose fields are
//! declared in their documented key order. Maps are only ever built from
//! ordered collections, so identical values always produce identical bytes.

use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn to_vec<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("in-memory serialization of plain data cannot fail")
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> String {
    String::from_utf8(to_vec(value)).expect("serde_json emits UTF-8")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hex SHA-256 of the canonical JSON encoding.
pub fn digest<T: Serialize + ?Sized>(value: &T) -> String {
    sha256_hex(&to_vec(value))
}
