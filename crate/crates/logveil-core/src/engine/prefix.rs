//! Prefix-preserving IPv4 pseudonymization in the Crypto-PAn construction.
//!
//! Two anonymized addresses share an n-bit prefix if and only if the
//! original addresses do. The map is a bijection on the 32-bit space,
//! keyed rather than table-driven, so logs can be anonymized consistently
//! across locations by sharing a short key.

use crate::error::EngineError;
use aes::cipher::{generic_array::GenericArray, BlockEncrypt, KeyInit};
use aes::Aes128;
use sha2::{Digest, Sha256};
use std::collections::HashMap;

/// Key material for the prefix-preserving map: a 16-byte cipher key and a
/// 16-byte padding block, derived deterministically from a passphrase.
#[derive(Clone, PartialEq, Eq)]
pub struct PpKey {
    bytes: [u8; 32],
}

impl PpKey {
    /// Use 32 raw key bytes directly (the layout of the reference
    /// implementation's key files).
    pub fn from_bytes(bytes: [u8; 32]) -> PpKey {
        PpKey { bytes }
    }

    pub fn cipher_key(&self) -> &[u8] {
        &self.bytes[..16]
    }

    pub fn padding_block(&self) -> &[u8] {
        &self.bytes[16..]
    }
}

impl std::fmt::Debug for PpKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // Never print key material.
        f.write_str("PpKey(..)")
    }
}

/// Derive key material by hashing a user passphrase. Deterministic: the
/// same passphrase always yields the same key, which is what keeps
/// anonymization consistent between runs and across sites.
pub fn derive_pp_key(passphrase: &str) -> Result<PpKey, EngineError> {
    if passphrase.is_empty() {
        return Err(EngineError::EmptyPassphrase);
    }
    let digest = Sha256::digest(passphrase.as_bytes());
    let mut bytes = [0u8; 32];
    bytes.copy_from_slice(&digest);
    Ok(PpKey { bytes })
}

/// The keyed prefix-preserving permutation. Holds the expanded cipher,
/// the encrypted padding block and a memo of already-computed mappings
/// (the function is deterministic in the key, so caching never changes
/// results).
pub struct PrefixPreserver {
    cipher: Aes128,
    padding: u128,
    memo: HashMap<u32, u32>,
}

impl PrefixPreserver {
    pub fn new(key: &PpKey) -> PrefixPreserver {
        let cipher = Aes128::new(GenericArray::from_slice(key.cipher_key()));
        let mut block = GenericArray::clone_from_slice(key.padding_block());
        cipher.encrypt_block(&mut block);
        let padding = u128::from_be_bytes(block.as_slice().try_into().unwrap());
        PrefixPreserver {
            cipher,
            padding,
            memo: HashMap::new(),
        }
    }

    /// Anonymize one address. Output bit i is input bit i XOR the
    /// most-significant bit of the block cipher applied to the first i-1
    /// input bits padded out with the fixed padding block.
    pub fn anonymize(&mut self, ip: u32) -> u32 {
        if let Some(&hit) = self.memo.get(&ip) {
            return hit;
        }
        let ext = u128::from(ip) << 96;
        let mut flips: u32 = 0;
        for pos in 0..32 {
            let mask = u128::MAX >> pos;
            let padded = (self.padding & mask) | (ext & !mask);
            let mut block = GenericArray::clone_from_slice(&padded.to_be_bytes());
            self.cipher.encrypt_block(&mut block);
            flips = (flips << 1) | u32::from(block[0] >> 7);
        }
        let out = ip ^ flips;
        self.memo.insert(ip, out);
        out
    }
}

/// One-shot form of [`PrefixPreserver::anonymize`].
pub fn pp_anonymize_ip(key: &PpKey, ip: u32) -> u32 {
    PrefixPreserver::new(key).anonymize(ip)
}

/// Length of the common leading bit prefix of two addresses.
pub fn common_prefix_len(a: u32, b: u32) -> u32 {
    (a ^ b).leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Key and vectors from the Crypto-PAn reference distribution.
    const REFERENCE_KEY: [u8; 32] = *b"\x15\x22\x17\x8d\x33\xa4\xcf\x80\x13\x0a\x5b\x16\x49\x90\x7d\x10\xd8\x98\x8f\x83\x79\x79\x65\x27\x62\x57\x4c\x2d\x2a\x84\x22\x02";

    fn ip(s: &str) -> u32 {
        s.parse::<std::net::Ipv4Addr>().unwrap().into()
    }

    #[test]
    fn reference_vectors() {
        let cases = [
            ("128.11.68.132", "135.242.180.132"),
            ("129.118.74.4", "134.136.186.123"),
            ("130.132.252.244", "133.68.164.234"),
            ("141.223.7.43", "141.167.8.160"),
            ("141.233.145.108", "141.129.237.235"),
            ("152.163.225.39", "151.140.114.167"),
            ("156.29.3.236", "147.225.12.42"),
            ("165.247.96.84", "162.9.99.234"),
            ("192.102.249.13", "252.138.62.131"),
            ("193.150.244.223", "253.169.52.216"),
            ("195.205.63.100", "255.186.223.5"),
            ("198.200.171.101", "249.199.68.213"),
            ("204.29.20.4", "243.33.20.123"),
            ("207.25.71.27", "241.33.119.156"),
            ("209.85.249.6", "226.170.70.6"),
            ("216.254.18.172", "235.7.16.162"),
            ("24.5.0.80", "100.9.15.210"),
            ("38.15.67.68", "64.3.66.187"),
            ("4.3.88.225", "124.60.155.63"),
            ("63.14.55.111", "95.9.215.7"),
            ("64.14.118.196", "0.255.183.58"),
            ("64.34.154.117", "0.221.154.117"),
            ("64.39.15.238", "0.219.7.41"),
        ];
        let mut pp = PrefixPreserver::new(&PpKey::from_bytes(REFERENCE_KEY));
        for (input, expected) in cases {
            assert_eq!(pp.anonymize(ip(input)), ip(expected), "input {input}");
        }
    }

    #[test]
    fn key_derivation_is_deterministic() {
        let a = derive_pp_key("some passphrase").unwrap();
        let b = derive_pp_key("some passphrase").unwrap();
        assert_eq!(a, b);
        let c = derive_pp_key("other passphrase").unwrap();
        assert_ne!(a, c);
        assert!(matches!(derive_pp_key(""), Err(EngineError::EmptyPassphrase)));
    }

    #[test]
    fn derived_key_splits_cipher_and_padding() {
        // SHA-256("k"), computed independently.
        let key = derive_pp_key("k").unwrap();
        let expected: [u8; 32] = [
            0x82, 0x54, 0xc3, 0x29, 0xa9, 0x28, 0x50, 0xf6, 0xd5, 0x39, 0xdd, 0x37, 0x6f, 0x48,
            0x16, 0xee, 0x27, 0x64, 0x51, 0x7d, 0xa5, 0xe0, 0x23, 0x55, 0x14, 0xaf, 0x43, 0x31,
            0x64, 0x48, 0x0d, 0x7a,
        ];
        assert_eq!(key.cipher_key(), &expected[..16]);
        assert_eq!(key.padding_block(), &expected[16..]);
    }

    #[test]
    fn preserves_prefix_lengths_on_known_subnet_pairs() {
        let key = derive_pp_key("table-pair-check").unwrap();
        let mut pp = PrefixPreserver::new(&key);
        // Hosts on one /24 stay together; different class-A networks split
        // exactly at the bits where the originals split.
        let pairs = [
            ("141.142.96.167", "141.142.96.18"),
            ("141.142.96.167", "141.142.132.37"),
            ("141.142.96.167", "12.161.3.3"),
            ("12.161.3.3", "12.72.8.5"),
            ("12.72.8.5", "212.3.4.1"),
        ];
        for (a, b) in pairs {
            let (a, b) = (ip(a), ip(b));
            assert_eq!(
                common_prefix_len(pp.anonymize(a), pp.anonymize(b)),
                common_prefix_len(a, b)
            );
        }
    }

    #[test]
    fn deterministic_and_memo_transparent() {
        let key = derive_pp_key("memo").unwrap();
        let mut pp = PrefixPreserver::new(&key);
        let first = pp.anonymize(ip("141.142.96.167"));
        let second = pp.anonymize(ip("141.142.96.167"));
        assert_eq!(first, second);
        assert_eq!(pp_anonymize_ip(&key, ip("141.142.96.167")), first);
    }
}
