//! Black-marker anonymization: every value of a field is replaced with one
//! canonical constant.
//!
//! Constants are keyed by `(kind, role)` rather than kind alone because
//! same-typed fields take different constants: the protocol octet maps to
//! 255 while ICMP type and code octets map to 0. The table is data.

use crate::error::EngineError;
use crate::record::{FieldKind, FieldValue};

/// Replacement constants in table form. Roles are the normalized names of
/// the netfilter field catalog; `resolve_role` folds common field handles
/// onto them.
const ROLE_TABLE: &[(FieldKind, &str, ConstSpec)] = &[
    (FieldKind::Ipv4, "ip", ConstSpec::Num(0)),
    (FieldKind::Mac, "mac", ConstSpec::Num(0)),
    (FieldKind::Port, "port", ConstSpec::Num(0)),
    // 255 is the IANA reserved protocol number; ToS and TTL share it.
    (FieldKind::UInt8, "protocol", ConstSpec::Num(255)),
    (FieldKind::UInt8, "tos", ConstSpec::Num(255)),
    (FieldKind::UInt8, "ttl", ConstSpec::Num(255)),
    (FieldKind::UInt8, "icmp_type", ConstSpec::Num(0)),
    (FieldKind::UInt8, "icmp_code", ConstSpec::Num(0)),
    (FieldKind::UInt16, "ip_id", ConstSpec::Num(0)),
    (FieldKind::UInt16, "tcp_window", ConstSpec::Num(0)),
    (FieldKind::UInt32, "tcp_seq", ConstSpec::Num(0)),
    (FieldKind::Flag, "df", ConstSpec::Num(0)),
    (FieldKind::Text, "ip_options", ConstSpec::Empty),
    (FieldKind::Text, "tcp_options", ConstSpec::Empty),
];

/// Fallback constants for kinds whose canonical value does not depend on the
/// role. `UInt8` is deliberately absent: the paper-assigned octet constants
/// conflict (255 for protocol-class fields, 0 for ICMP fields), so an
/// unrecognized 8-bit role is a configuration error. Timestamps have no
/// black-marker constant at all; they are annihilated instead.
const KIND_DEFAULTS: &[(FieldKind, ConstSpec)] = &[
    (FieldKind::Ipv4, ConstSpec::Num(0)),
    (FieldKind::Mac, ConstSpec::Num(0)),
    (FieldKind::Port, ConstSpec::Num(0)),
    (FieldKind::UInt16, ConstSpec::Num(0)),
    (FieldKind::UInt32, ConstSpec::Num(0)),
    (FieldKind::Flag, ConstSpec::Num(0)),
    (FieldKind::Text, ConstSpec::Empty),
    (FieldKind::Bytes, ConstSpec::Empty),
];

#[derive(Clone, Copy)]
enum ConstSpec {
    Num(u64),
    Empty,
}

impl ConstSpec {
    fn materialize(self, kind: FieldKind) -> FieldValue {
        match (kind, self) {
            (FieldKind::Ipv4, ConstSpec::Num(n)) => FieldValue::Ipv4(n as u32),
            (FieldKind::Mac, ConstSpec::Num(_)) => FieldValue::Mac([0; 6]),
            (FieldKind::Port, ConstSpec::Num(n)) => FieldValue::Port(n as u16),
            (FieldKind::UInt8, ConstSpec::Num(n)) => FieldValue::UInt8(n as u8),
            (FieldKind::UInt16, ConstSpec::Num(n)) => FieldValue::UInt16(n as u16),
            (FieldKind::UInt32, ConstSpec::Num(n)) => FieldValue::UInt32(n as u32),
            (FieldKind::Flag, ConstSpec::Num(n)) => FieldValue::Flag(n as u8),
            (FieldKind::Text, _) => FieldValue::Text(String::new()),
            (FieldKind::Bytes, _) => FieldValue::Bytes(Vec::new()),
            (kind, _) => unreachable!("no constant spec materializes as {kind}"),
        }
    }
}

/// Fold a field handle onto the canonical role it plays in the replacement
/// table. Handles not listed here pass through unchanged.
pub fn resolve_role(handle: &str) -> &str {
    let lower = handle.trim();
    match lower.to_ascii_lowercase().as_str() {
        "src_ip" | "dst_ip" | "ip" | "saddr" | "daddr" | "src" | "dst" => "ip",
        "src_mac" | "dst_mac" | "mac" => "mac",
        "spt" | "dpt" | "port" | "src_port" | "dst_port" | "sport" | "dport" => "port",
        "proto" | "protocol" => "protocol",
        "tos" | "prec" => "tos",
        "ttl" => "ttl",
        "id" | "ip_id" => "ip_id",
        "df" => "df",
        "window" | "tcp_window" => "tcp_window",
        "seq" | "tcp_seq" | "tcp_sequence" => "tcp_seq",
        "icmp_type" => "icmp_type",
        "icmp_code" => "icmp_code",
        "opt" | "ip_options" => "ip_options",
        "tcp_options" => "tcp_options",
        _ => lower,
    }
}

/// Look up the canonical replacement constant for a field of the given kind
/// playing the given role. Pure: same input, same output, always.
pub fn canonical_blackmarker_value(
    kind: FieldKind,
    field_role: &str,
) -> Result<FieldValue, EngineError> {
    let role = resolve_role(field_role);
    for (k, r, spec) in ROLE_TABLE {
        if *k == kind && *r == role {
            return Ok(spec.materialize(kind));
        }
    }
    for (k, spec) in KIND_DEFAULTS {
        if *k == kind {
            return Ok(spec.materialize(kind));
        }
    }
    Err(EngineError::UnknownBlackMarkerRole {
        kind,
        role: field_role.to_string(),
    })
}

/// Replace a value with its canonical black-marker constant. The input
/// content is ignored entirely; only its kind and role matter.
pub fn black_marker(value: &FieldValue, role: &str) -> Result<FieldValue, EngineError> {
    canonical_blackmarker_value(value.kind(), role)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_constants() {
        assert_eq!(
            canonical_blackmarker_value(FieldKind::Ipv4, "src_ip").unwrap(),
            FieldValue::Ipv4(0)
        );
        assert_eq!(
            canonical_blackmarker_value(FieldKind::UInt8, "protocol").unwrap(),
            FieldValue::UInt8(255)
        );
        assert_eq!(
            canonical_blackmarker_value(FieldKind::UInt16, "ip_id").unwrap(),
            FieldValue::UInt16(0)
        );
        assert_eq!(
            canonical_blackmarker_value(FieldKind::UInt8, "tos").unwrap(),
            FieldValue::UInt8(255)
        );
        assert_eq!(
            canonical_blackmarker_value(FieldKind::UInt8, "ttl").unwrap(),
            FieldValue::UInt8(255)
        );
        assert_eq!(
            canonical_blackmarker_value(FieldKind::UInt8, "icmp_type").unwrap(),
            FieldValue::UInt8(0)
        );
        assert_eq!(
            canonical_blackmarker_value(FieldKind::Flag, "df").unwrap(),
            FieldValue::Flag(0)
        );
        assert_eq!(
            canonical_blackmarker_value(FieldKind::UInt16, "window").unwrap(),
            FieldValue::UInt16(0)
        );
        assert_eq!(
            canonical_blackmarker_value(FieldKind::UInt32, "seq").unwrap(),
            FieldValue::UInt32(0)
        );
        assert_eq!(
            canonical_blackmarker_value(FieldKind::Text, "opt").unwrap(),
            FieldValue::Text(String::new())
        );
        assert_eq!(
            canonical_blackmarker_value(FieldKind::Mac, "src_mac").unwrap(),
            FieldValue::Mac([0; 6])
        );
    }

    #[test]
    fn marker_ignores_input_content() {
        let a = black_marker(&FieldValue::Port(80), "dpt").unwrap();
        let b = black_marker(&FieldValue::Port(33211), "spt").unwrap();
        assert_eq!(a, FieldValue::Port(0));
        assert_eq!(a, b);
        // Fixed point of the constant map.
        assert_eq!(
            black_marker(&FieldValue::Ipv4(0), "src_ip").unwrap(),
            FieldValue::Ipv4(0)
        );
        // Idempotent.
        let once = black_marker(&FieldValue::UInt8(6), "proto").unwrap();
        assert_eq!(black_marker(&once, "proto").unwrap(), once);
    }

    #[test]
    fn ambiguous_uint8_role_is_config_error() {
        let err = canonical_blackmarker_value(FieldKind::UInt8, "mystery").unwrap_err();
        assert!(matches!(err, EngineError::UnknownBlackMarkerRole { .. }));
    }

    #[test]
    fn timestamps_have_no_marker_constant() {
        let err = canonical_blackmarker_value(FieldKind::Timestamp, "timestamp").unwrap_err();
        assert!(matches!(err, EngineError::UnknownBlackMarkerRole { .. }));
    }
}
