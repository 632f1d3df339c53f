//! Truncation: keep a leading portion of a value and annihilate the rest.
//!
//! Binary values keep their most-significant `keep_bits` bits and zero the
//! remainder, staying the same width. Strings are cut at a character index
//! or before a delimiter.

use crate::error::EngineError;
use crate::record::{FieldKind, FieldValue};

/// Where to cut a text value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TextCut {
    /// Keep the first `n` characters.
    Index(usize),
    /// Keep everything before the first occurrence of the delimiter.
    /// If the delimiter does not occur the string is left unchanged.
    BeforeDelimiter(char),
}

/// Zero all bits after the most-significant `keep_bits` bits.
/// Truncating all bits degenerates to black-marker anonymization;
/// keeping the full width is the identity.
pub fn truncate_binary(value: &FieldValue, keep_bits: u32) -> Result<FieldValue, EngineError> {
    let kind = value.kind();
    let width = match kind {
        FieldKind::Ipv4 | FieldKind::Mac | FieldKind::Port | FieldKind::UInt8
        | FieldKind::UInt16 | FieldKind::UInt32 => kind.bit_width().unwrap(),
        _ => return Err(EngineError::NotTruncatable { kind }),
    };
    if keep_bits > width {
        return Err(EngineError::KeepBitsOutOfRange {
            kind,
            keep_bits,
            width,
        });
    }

    let mask = |bits: u64, w: u32| -> u64 {
        if keep_bits == 0 {
            0
        } else {
            bits & (!0u64 << (w - keep_bits)) & (!0u64 >> (64 - w))
        }
    };
    Ok(match value {
        FieldValue::Ipv4(v) => FieldValue::Ipv4(mask(u64::from(*v), 32) as u32),
        FieldValue::Port(v) => FieldValue::Port(mask(u64::from(*v), 16) as u16),
        FieldValue::UInt8(v) => FieldValue::UInt8(mask(u64::from(*v), 8) as u8),
        FieldValue::UInt16(v) => FieldValue::UInt16(mask(u64::from(*v), 16) as u16),
        FieldValue::UInt32(v) => FieldValue::UInt32(mask(u64::from(*v), 32) as u32),
        FieldValue::Mac(m) => {
            let as_u64 = m.iter().fold(0u64, |acc, b| (acc << 8) | u64::from(*b));
            let kept = mask(as_u64, 48);
            let mut out = [0u8; 6];
            for (i, byte) in out.iter_mut().enumerate() {
                *byte = (kept >> (40 - 8 * i)) as u8;
            }
            FieldValue::Mac(out)
        }
        _ => unreachable!(),
    })
}

/// Cut a string per the cut spec. Indexes count characters, not bytes.
pub fn truncate_string(value: &str, cut: &TextCut) -> String {
    match cut {
        TextCut::Index(n) => value.chars().take(*n).collect(),
        TextCut::BeforeDelimiter(d) => match value.find(*d) {
            Some(pos) => value[..pos].to_string(),
            None => value.to_string(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ip(s: &str) -> FieldValue {
        FieldValue::parse_as(FieldKind::Ipv4, s).unwrap()
    }

    #[test]
    fn sixteen_bit_truncation_gives_slash_sixteen() {
        assert_eq!(truncate_binary(&ip("141.142.96.167"), 16).unwrap(), ip("141.142.0.0"));
        assert_eq!(truncate_binary(&ip("12.72.8.5"), 16).unwrap(), ip("12.72.0.0"));
    }

    #[test]
    fn zero_bits_is_black_marker() {
        assert_eq!(truncate_binary(&ip("212.3.4.1"), 0).unwrap(), ip("0.0.0.0"));
    }

    #[test]
    fn full_width_is_identity() {
        assert_eq!(truncate_binary(&ip("212.3.4.1"), 32).unwrap(), ip("212.3.4.1"));
        assert_eq!(
            truncate_binary(&FieldValue::Port(33211), 16).unwrap(),
            FieldValue::Port(33211)
        );
    }

    #[test]
    fn out_of_range_rejected() {
        let err = truncate_binary(&ip("1.2.3.4"), 40).unwrap_err();
        assert!(matches!(err, EngineError::KeepBitsOutOfRange { keep_bits: 40, .. }));
        let err = truncate_binary(&FieldValue::Text("x".into()), 1).unwrap_err();
        assert!(matches!(err, EngineError::NotTruncatable { .. }));
    }

    #[test]
    fn mac_keeps_manufacturer_prefix() {
        let mac = FieldValue::Mac([0x00, 0x0c, 0x29, 0xa8, 0x9f, 0x77]);
        assert_eq!(
            truncate_binary(&mac, 24).unwrap(),
            FieldValue::Mac([0x00, 0x0c, 0x29, 0, 0, 0])
        );
        assert_eq!(truncate_binary(&mac, 48).unwrap(), mac);
        assert_eq!(truncate_binary(&mac, 0).unwrap(), FieldValue::Mac([0; 6]));
    }

    #[test]
    fn string_cuts() {
        assert_eq!(
            truncate_string("user@example.net", &TextCut::BeforeDelimiter('@')),
            "user"
        );
        assert_eq!(truncate_string("abc", &TextCut::Index(3)), "abc");
        assert_eq!(truncate_string("abc", &TextCut::Index(0)), "");
        // Absent delimiter leaves the string unchanged.
        assert_eq!(
            truncate_string("nodomain", &TextCut::BeforeDelimiter('@')),
            "nodomain"
        );
        // Index counts characters, not bytes.
        assert_eq!(truncate_string("käse.example", &TextCut::Index(4)), "käse");
    }
}
