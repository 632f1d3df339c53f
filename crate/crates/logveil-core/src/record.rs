//! Canonical record and field-value representations shared by the engine,
//! the policy manager and every parser module.
//!
//! A record is an ordered list of `(name, value)` tuples plus an optional
//! raw remainder the owning module uses to reconstruct output exactly.

use crate::error::RecordError;
use std::fmt;

/// A field value in canonical form.
///
/// Parser modules convert whatever their log format uses (dotted-quad text,
/// hex bytes, syslog dates) into one of these; the engine only ever sees the
/// canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FieldValue {
    /// IPv4 address as a 32-bit unsigned integer in network meaning.
    Ipv4(u32),
    /// 48-bit hardware address.
    Mac([u8; 6]),
    /// Seconds since 1970-01-01T00:00:00Z. Held as 64-bit so shifts cannot
    /// overflow internally; emission is range-checked where formats demand
    /// a 32-bit epoch.
    Timestamp(u64),
    /// Transport port number.
    Port(u16),
    UInt8(u8),
    UInt16(u16),
    UInt32(u32),
    Text(String),
    Bytes(Vec<u8>),
    /// Boolean-ish octet: non-zero means the bit is set.
    Flag(u8),
}

/// The type tag of a [`FieldValue`], used by schemas to type-check policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Ipv4,
    Mac,
    Timestamp,
    Port,
    UInt8,
    UInt16,
    UInt32,
    Text,
    Bytes,
    Flag,
}

impl FieldValue {
    /// The kind tag for this value. Total: every value maps to exactly one kind.
    pub fn kind(&self) -> FieldKind {
        match self {
            FieldValue::Ipv4(_) => FieldKind::Ipv4,
            FieldValue::Mac(_) => FieldKind::Mac,
            FieldValue::Timestamp(_) => FieldKind::Timestamp,
            FieldValue::Port(_) => FieldKind::Port,
            FieldValue::UInt8(_) => FieldKind::UInt8,
            FieldValue::UInt16(_) => FieldKind::UInt16,
            FieldValue::UInt32(_) => FieldKind::UInt32,
            FieldValue::Text(_) => FieldKind::Text,
            FieldValue::Bytes(_) => FieldKind::Bytes,
            FieldValue::Flag(_) => FieldKind::Flag,
        }
    }

    /// Flag semantics: any non-zero octet counts as set.
    pub fn is_set_flag(&self) -> bool {
        matches!(self, FieldValue::Flag(v) if *v != 0)
    }

    /// Canonical big-endian byte encoding, the input to hash and HMAC.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        match self {
            FieldValue::Ipv4(v) => v.to_be_bytes().to_vec(),
            FieldValue::Mac(m) => m.to_vec(),
            FieldValue::Timestamp(v) => v.to_be_bytes().to_vec(),
            FieldValue::Port(v) => v.to_be_bytes().to_vec(),
            FieldValue::UInt8(v) => vec![*v],
            FieldValue::UInt16(v) => v.to_be_bytes().to_vec(),
            FieldValue::UInt32(v) => v.to_be_bytes().to_vec(),
            FieldValue::Text(s) => s.as_bytes().to_vec(),
            FieldValue::Bytes(b) => b.clone(),
            FieldValue::Flag(v) => vec![*v],
        }
    }

    /// Canonical textual rendering: dotted-quad IPs, colon-hex MACs,
    /// decimal integers and epochs, hex byte strings, 0/1 flags.
    pub fn render(&self) -> String {
        match self {
            FieldValue::Ipv4(v) => {
                let o = v.to_be_bytes();
                format!("{}.{}.{}.{}", o[0], o[1], o[2], o[3])
            }
            FieldValue::Mac(m) => m
                .iter()
                .map(|b| format!("{b:02x}"))
                .collect::<Vec<_>>()
                .join(":"),
            FieldValue::Timestamp(v) => v.to_string(),
            FieldValue::Port(v) => v.to_string(),
            FieldValue::UInt8(v) => v.to_string(),
            FieldValue::UInt16(v) => v.to_string(),
            FieldValue::UInt32(v) => v.to_string(),
            FieldValue::Text(s) => s.clone(),
            FieldValue::Bytes(b) => b.iter().map(|x| format!("{x:02x}")).collect(),
            FieldValue::Flag(v) => if *v != 0 { "1" } else { "0" }.to_string(),
        }
    }

    /// Parse canonical text into a value of the requested kind.
    pub fn parse_as(kind: FieldKind, text: &str) -> Result<FieldValue, RecordError> {
        let err = |reason: &str| RecordError::Coercion {
            kind,
            text: text.to_string(),
            reason: reason.to_string(),
        };
        match kind {
            FieldKind::Ipv4 => {
                let octets: Vec<&str> = text.split('.').collect();
                if octets.len() != 4 {
                    return Err(err("expected dotted-quad"));
                }
                let mut v: u32 = 0;
                for part in octets {
                    let o: u8 = part.parse().map_err(|_| err("bad octet"))?;
                    v = (v << 8) | u32::from(o);
                }
                Ok(FieldValue::Ipv4(v))
            }
            FieldKind::Mac => {
                let parts: Vec<&str> = text.split(':').collect();
                if parts.len() != 6 {
                    return Err(err("expected six colon-separated octets"));
                }
                let mut m = [0u8; 6];
                for (i, part) in parts.iter().enumerate() {
                    m[i] = u8::from_str_radix(part, 16).map_err(|_| err("bad hex octet"))?;
                }
                Ok(FieldValue::Mac(m))
            }
            FieldKind::Timestamp => text
                .parse::<u64>()
                .map(FieldValue::Timestamp)
                .map_err(|_| err("expected epoch seconds")),
            FieldKind::Port => text
                .parse::<u16>()
                .map(FieldValue::Port)
                .map_err(|_| err("expected integer in 0..=65535")),
            FieldKind::UInt8 => text
                .parse::<u8>()
                .map(FieldValue::UInt8)
                .map_err(|_| err("expected integer in 0..=255")),
            FieldKind::UInt16 => text
                .parse::<u16>()
                .map(FieldValue::UInt16)
                .map_err(|_| err("expected integer in 0..=65535")),
            FieldKind::UInt32 => text
                .parse::<u32>()
                .map(FieldValue::UInt32)
                .map_err(|_| err("expected 32-bit unsigned integer")),
            FieldKind::Text => Ok(FieldValue::Text(text.to_string())),
            FieldKind::Bytes => {
                if text.len() % 2 != 0 {
                    return Err(err("odd-length hex string"));
                }
                let mut out = Vec::with_capacity(text.len() / 2);
                for i in (0..text.len()).step_by(2) {
                    let byte = u8::from_str_radix(&text[i..i + 2], 16)
                        .map_err(|_| err("bad hex byte"))?;
                    out.push(byte);
                }
                Ok(FieldValue::Bytes(out))
            }
            FieldKind::Flag => text
                .parse::<u8>()
                .map(FieldValue::Flag)
                .map_err(|_| err("expected integer in 0..=255")),
        }
    }
}

impl FieldKind {
    /// Stable lowercase name used in schema and column-spec documents.
    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::Ipv4 => "ipv4",
            FieldKind::Mac => "mac",
            FieldKind::Timestamp => "timestamp",
            FieldKind::Port => "port",
            FieldKind::UInt8 => "uint8",
            FieldKind::UInt16 => "uint16",
            FieldKind::UInt32 => "uint32",
            FieldKind::Text => "text",
            FieldKind::Bytes => "bytes",
            FieldKind::Flag => "flag",
        }
    }

    pub fn parse(name: &str) -> Option<FieldKind> {
        Some(match name {
            "ipv4" => FieldKind::Ipv4,
            "mac" => FieldKind::Mac,
            "timestamp" => FieldKind::Timestamp,
            "port" => FieldKind::Port,
            "uint8" => FieldKind::UInt8,
            "uint16" => FieldKind::UInt16,
            "uint32" => FieldKind::UInt32,
            "text" => FieldKind::Text,
            "bytes" => FieldKind::Bytes,
            "flag" => FieldKind::Flag,
            _ => return None,
        })
    }

    /// Bit width for fixed-width kinds, `None` for variable-length ones.
    pub fn bit_width(&self) -> Option<u32> {
        match self {
            FieldKind::Ipv4 => Some(32),
            FieldKind::Mac => Some(48),
            FieldKind::Timestamp => Some(64),
            FieldKind::Port => Some(16),
            FieldKind::UInt8 => Some(8),
            FieldKind::UInt16 => Some(16),
            FieldKind::UInt32 => Some(32),
            FieldKind::Flag => Some(8),
            FieldKind::Text | FieldKind::Bytes => None,
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The unit of data flowing between a parser module and the engine:
/// an ordered sequence of uniquely named fields, plus the raw text the
/// module needs to rebuild the original layout.
///
/// Field order is preserved through the pipeline; under an identity policy
/// a module reproduces its input exactly.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Record {
    fields: Vec<(String, FieldValue)>,
    raw_remainder: Option<String>,
}

impl Record {
    pub fn new() -> Record {
        Record::default()
    }

    /// Append a field. Names must be unique within a record.
    pub fn push(&mut self, name: impl Into<String>, value: FieldValue) -> Result<(), RecordError> {
        let name = name.into();
        if self.fields.iter().any(|(n, _)| *n == name) {
            return Err(RecordError::DuplicateField(name));
        }
        self.fields.push((name, value));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&FieldValue> {
        self.fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }

    /// Replace a field value in place, keeping its position. The new value
    /// must have the same kind: every anonymization primitive is
    /// kind-preserving.
    pub fn set(&mut self, name: &str, value: FieldValue) -> Result<(), RecordError> {
        let slot = self
            .fields
            .iter_mut()
            .find(|(n, _)| n == name)
            .ok_or_else(|| RecordError::NoSuchField(name.to_string()))?;
        if slot.1.kind() != value.kind() {
            return Err(RecordError::KindChanged {
                name: name.to_string(),
                actual: slot.1.kind(),
                replacement: value.kind(),
            });
        }
        slot.1 = value;
        Ok(())
    }

    pub fn fields(&self) -> impl Iterator<Item = (&str, &FieldValue)> {
        self.fields.iter().map(|(n, v)| (n.as_str(), v))
    }

    pub fn field_names(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn raw_remainder(&self) -> Option<&str> {
        self.raw_remainder.as_deref()
    }

    pub fn set_raw_remainder(&mut self, raw: impl Into<String>) {
        self.raw_remainder = Some(raw.into());
    }

    /// True for records that carry only unparsed text, as produced for
    /// malformed lines in lenient mode.
    pub fn is_raw_only(&self) -> bool {
        self.fields.is_empty() && self.raw_remainder.is_some()
    }
}

/// Build an [`Record`] from `(name, value)` pairs; panics on duplicates,
/// intended for fixtures and tests.
impl FromIterator<(String, FieldValue)> for Record {
    fn from_iter<T: IntoIterator<Item = (String, FieldValue)>>(iter: T) -> Self {
        let mut record = Record::new();
        for (name, value) in iter {
            record.push(name, value).expect("duplicate field in literal");
        }
        record
    }
}
