//! Hash and HMAC anonymization.
//!
//! One fixed, standardized hash backs both primitives so golden values stay
//! stable; its identity is reported in run output. Text fields receive the
//! full digest as lowercase hexadecimal; fixed-width fields receive the
//! most-significant digest bytes truncated to the field width.

use crate::error::EngineError;
use crate::record::{FieldKind, FieldValue};
use hmac::{Hmac, Mac};
use sha2::{Digest, Sha256};

/// Name of the digest behind `hash_value` and `hmac_value`, for run reports.
pub const HASH_ALGORITHM: &str = "SHA-256";

/// Hash a value's canonical byte encoding into the given output kind.
pub fn hash_value(value: &FieldValue, out_kind: FieldKind) -> Result<FieldValue, EngineError> {
    let digest = Sha256::digest(value.canonical_bytes());
    digest_to_kind(&digest, out_kind)
}

/// Keyed-hash variant; the secret keeps dictionary attacks off small value
/// spaces. Same output conventions as `hash_value`.
pub fn hmac_value(
    value: &FieldValue,
    secret: &[u8],
    out_kind: FieldKind,
) -> Result<FieldValue, EngineError> {
    if secret.is_empty() {
        return Err(EngineError::EmptySecret);
    }
    let mut mac =
        <Hmac<Sha256> as Mac>::new_from_slice(secret).expect("hmac accepts any key length");
    mac.update(&value.canonical_bytes());
    let digest = mac.finalize().into_bytes();
    digest_to_kind(&digest, out_kind)
}

fn digest_to_kind(digest: &[u8], out_kind: FieldKind) -> Result<FieldValue, EngineError> {
    Ok(match out_kind {
        FieldKind::Text => FieldValue::Text(to_hex(digest)),
        FieldKind::Bytes => FieldValue::Bytes(digest.to_vec()),
        FieldKind::Ipv4 => FieldValue::Ipv4(u32::from_be_bytes(digest[..4].try_into().unwrap())),
        FieldKind::Mac => FieldValue::Mac(digest[..6].try_into().unwrap()),
        FieldKind::Port => FieldValue::Port(u16::from_be_bytes(digest[..2].try_into().unwrap())),
        FieldKind::UInt8 => FieldValue::UInt8(digest[0]),
        FieldKind::UInt16 => {
            FieldValue::UInt16(u16::from_be_bytes(digest[..2].try_into().unwrap()))
        }
        FieldKind::UInt32 => {
            FieldValue::UInt32(u32::from_be_bytes(digest[..4].try_into().unwrap()))
        }
        FieldKind::Timestamp => {
            FieldValue::Timestamp(u64::from_be_bytes(digest[..8].try_into().unwrap()))
        }
        FieldKind::Flag => FieldValue::Flag(digest[0]),
    })
}

fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_text_digest() {
        // SHA-256 of the literal string, computed with an independent tool.
        let out = hash_value(
            &FieldValue::Text("vorlon.ncsa.uiuc.edu".into()),
            FieldKind::Text,
        )
        .unwrap();
        assert_eq!(
            out,
            FieldValue::Text(
                "0971f51174320e9af9ffc36af518801f73d6dd2990e449eee949466fc3d8fa3a".into()
            )
        );
    }

    #[test]
    fn golden_binary_truncation() {
        // First digest bytes of SHA-256(8d 8e 60 a7), computed independently.
        let out = hash_value(&FieldValue::Ipv4(0x8d8e60a7), FieldKind::Ipv4).unwrap();
        assert_eq!(out.render(), "185.75.0.12");
        let port = hash_value(&FieldValue::Port(80), FieldKind::Port).unwrap();
        assert_eq!(port, FieldValue::Port(39376));
    }

    #[test]
    fn equal_inputs_equal_digests() {
        let a = hash_value(&FieldValue::Text("abc".into()), FieldKind::Text).unwrap();
        let b = hash_value(&FieldValue::Text("abc".into()), FieldKind::Text).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn width_bound_holds() {
        for input in 0u32..64 {
            match hash_value(&FieldValue::UInt32(input), FieldKind::UInt16).unwrap() {
                FieldValue::UInt16(_) => {}
                other => panic!("wrong kind {other:?}"),
            }
        }
    }

    #[test]
    fn golden_hmac() {
        // HMAC-SHA-256("secret", "vorlon.ncsa.uiuc.edu"), computed independently.
        let out = hmac_value(
            &FieldValue::Text("vorlon.ncsa.uiuc.edu".into()),
            b"secret",
            FieldKind::Text,
        )
        .unwrap();
        assert_eq!(
            out,
            FieldValue::Text(
                "91403657c671afba410b284fd77585977cff36a5b6575e95996ff482013a935d".into()
            )
        );
        // HMAC-SHA-256("k", 8d 8e 60 a7) leading bytes, computed independently.
        let ip = hmac_value(&FieldValue::Ipv4(0x8d8e60a7), b"k", FieldKind::Ipv4).unwrap();
        assert_eq!(ip.render(), "246.70.47.112");
    }

    #[test]
    fn hmac_depends_on_secret_and_differs_from_hash() {
        let value = FieldValue::Text("vorlon.ncsa.uiuc.edu".into());
        let k1 = hmac_value(&value, b"alpha", FieldKind::Text).unwrap();
        let k2 = hmac_value(&value, b"beta", FieldKind::Text).unwrap();
        assert_ne!(k1, k2);
        let plain = hash_value(&value, FieldKind::Text).unwrap();
        assert_ne!(k1, plain);
        assert_ne!(k2, plain);
        assert!(matches!(
            hmac_value(&value, b"", FieldKind::Text),
            Err(EngineError::EmptySecret)
        ));
    }

    #[test]
    fn hmac_is_deterministic() {
        let value = FieldValue::Port(443);
        let a = hmac_value(&value, b"key", FieldKind::Port).unwrap();
        let b = hmac_value(&value, b"key", FieldKind::Port).unwrap();
        assert_eq!(a, b);
    }
}
