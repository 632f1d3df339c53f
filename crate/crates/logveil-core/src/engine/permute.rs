//! Random permutation over a fixed-width value space.
//!
//! The table keeps two indexes: a forward map from unanonymized to
//! anonymized values, and the set of anonymized values already assigned so
//! a fresh draw can be rejected without scanning the forward map. Fixed
//! points (or arbitrary pairs) can be prefilled to pin part of the
//! permutation.

use crate::error::EngineError;
use crate::record::{FieldKind, FieldValue};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use std::collections::{HashMap, HashSet};

pub struct PermutationTable {
    kind: FieldKind,
    forward: HashMap<u64, u64>,
    used: HashSet<u64>,
    rng: ChaCha20Rng,
}

impl PermutationTable {
    /// A fresh table over the value space of `kind`. Only fixed-width,
    /// non-boolean kinds can be permuted.
    pub fn new(kind: FieldKind, rng: ChaCha20Rng) -> Result<PermutationTable, EngineError> {
        space_size(kind)?;
        Ok(PermutationTable {
            kind,
            forward: HashMap::new(),
            used: HashSet::new(),
            rng,
        })
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// Pin mappings ahead of time, e.g. to keep a known subset of addresses
    /// unchanged. Pairs must stay injective, both among themselves and
    /// against mappings already in the table.
    pub fn prefill_fixed(
        &mut self,
        pairs: &[(FieldValue, FieldValue)],
    ) -> Result<(), EngineError> {
        for (from, to) in pairs {
            let f = self.encode(from)?;
            let t = self.encode(to)?;
            match self.forward.get(&f) {
                Some(existing) if *existing == t => continue,
                Some(existing) => {
                    return Err(EngineError::PrefillConflict {
                        reason: format!(
                            "{} already maps to {}, cannot remap to {}",
                            from.render(),
                            self.decode(*existing).render(),
                            to.render()
                        ),
                    });
                }
                None => {}
            }
            if self.used.contains(&t) {
                return Err(EngineError::PrefillConflict {
                    reason: format!("{} is already the image of another value", to.render()),
                });
            }
            self.forward.insert(f, t);
            self.used.insert(t);
        }
        Ok(())
    }

    /// Map a value, drawing a fresh uniform image on first sight and
    /// replaying the stored image afterwards. Injective by construction:
    /// candidate draws are rejected while they collide with used images.
    pub fn permute(&mut self, value: &FieldValue) -> Result<FieldValue, EngineError> {
        let key = self.encode(value)?;
        if let Some(&image) = self.forward.get(&key) {
            return Ok(self.decode(image));
        }
        let space = space_size(self.kind)?;
        if self.used.len() as u64 >= space {
            return Err(EngineError::ValueSpaceExhausted { kind: self.kind });
        }
        let image = loop {
            let candidate = self.rng.gen_range(0..space);
            if !self.used.contains(&candidate) {
                break candidate;
            }
        };
        self.forward.insert(key, image);
        self.used.insert(image);
        Ok(self.decode(image))
    }

    fn encode(&self, value: &FieldValue) -> Result<u64, EngineError> {
        if value.kind() != self.kind {
            return Err(EngineError::KindMismatch {
                expected: self.kind,
                actual: value.kind(),
            });
        }
        Ok(match value {
            FieldValue::Ipv4(v) => u64::from(*v),
            FieldValue::Port(v) => u64::from(*v),
            FieldValue::UInt8(v) => u64::from(*v),
            FieldValue::UInt16(v) => u64::from(*v),
            FieldValue::UInt32(v) => u64::from(*v),
            FieldValue::Mac(m) => m.iter().fold(0u64, |acc, b| (acc << 8) | u64::from(*b)),
            _ => unreachable!("constructor rejects non-permutable kinds"),
        })
    }

    fn decode(&self, raw: u64) -> FieldValue {
        match self.kind {
            FieldKind::Ipv4 => FieldValue::Ipv4(raw as u32),
            FieldKind::Port => FieldValue::Port(raw as u16),
            FieldKind::UInt8 => FieldValue::UInt8(raw as u8),
            FieldKind::UInt16 => FieldValue::UInt16(raw as u16),
            FieldKind::UInt32 => FieldValue::UInt32(raw as u32),
            FieldKind::Mac => {
                let mut m = [0u8; 6];
                for (i, byte) in m.iter_mut().enumerate() {
                    *byte = (raw >> (40 - 8 * i)) as u8;
                }
                FieldValue::Mac(m)
            }
            _ => unreachable!(),
        }
    }
}

fn space_size(kind: FieldKind) -> Result<u64, EngineError> {
    match kind {
        FieldKind::Ipv4 | FieldKind::UInt32 => Ok(1 << 32),
        FieldKind::Mac => Ok(1 << 48),
        FieldKind::Port | FieldKind::UInt16 => Ok(1 << 16),
        FieldKind::UInt8 => Ok(1 << 8),
        kind => Err(EngineError::NotPermutable { kind }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn table(kind: FieldKind) -> PermutationTable {
        PermutationTable::new(kind, ChaCha20Rng::seed_from_u64(7)).unwrap()
    }

    #[test]
    fn repeat_inputs_replay_the_mapping() {
        let mut t = table(FieldKind::Ipv4);
        let first = t.permute(&FieldValue::Ipv4(0x8d8e6012)).unwrap();
        let second = t.permute(&FieldValue::Ipv4(0x8d8e6012)).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn prefilled_fixed_point_honored() {
        let mut t = table(FieldKind::Ipv4);
        let x = FieldValue::Ipv4(0x0a000001);
        t.prefill_fixed(&[(x.clone(), x.clone())]).unwrap();
        assert_eq!(t.permute(&x).unwrap(), x);
    }

    #[test]
    fn prefilled_image_never_reused() {
        let mut t = table(FieldKind::UInt8);
        let a = FieldValue::UInt8(1);
        let b = FieldValue::UInt8(2);
        t.prefill_fixed(&[(a, b.clone())]).unwrap();
        for input in 3u8..=255 {
            let out = t.permute(&FieldValue::UInt8(input)).unwrap();
            assert_ne!(out, b, "image {input} stole the prefilled target");
        }
    }

    #[test]
    fn conflicting_prefill_rejected() {
        let mut t = table(FieldKind::Port);
        let err = t
            .prefill_fixed(&[
                (FieldValue::Port(1), FieldValue::Port(9)),
                (FieldValue::Port(2), FieldValue::Port(9)),
            ])
            .unwrap_err();
        assert!(matches!(err, EngineError::PrefillConflict { .. }));
        // Remapping an existing entry is also a conflict.
        let err = t
            .prefill_fixed(&[(FieldValue::Port(1), FieldValue::Port(10))])
            .unwrap_err();
        assert!(matches!(err, EngineError::PrefillConflict { .. }));
        // Re-stating an identical entry is fine.
        t.prefill_fixed(&[(FieldValue::Port(1), FieldValue::Port(9))])
            .unwrap();
    }

    #[test]
    fn uint8_space_is_a_full_bijection() {
        let mut t = table(FieldKind::UInt8);
        let mut images = HashSet::new();
        for v in 0u8..=255 {
            let out = t.permute(&FieldValue::UInt8(v)).unwrap();
            assert!(images.insert(out.render()), "collision at input {v}");
        }
        assert_eq!(images.len(), 256);
    }

    #[test]
    fn kind_mismatch_rejected() {
        let mut t = table(FieldKind::Ipv4);
        let err = t.permute(&FieldValue::Port(80)).unwrap_err();
        assert!(matches!(err, EngineError::KindMismatch { .. }));
        assert!(matches!(
            PermutationTable::new(FieldKind::Text, ChaCha20Rng::seed_from_u64(0)),
            Err(EngineError::NotPermutable { .. })
        ));
    }
}
