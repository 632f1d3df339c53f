//! The anonymization engine: the full suite of field-level primitives.
//!
//! Stateless primitives (black marker, truncation, prefix-preserving with a
//! key, hash, HMAC, bilateral classification, time unit annihilation) are
//! pure functions and safe to call concurrently. Stateful ones operate on
//! explicit state objects ([`PermutationTable`], [`EnumWindow`],
//! [`ShiftState`]) owned by a single run.

mod blackmarker;
mod digest;
mod enumerate;
mod hostname;
mod permute;
mod prefix;
mod time;
mod truncate;

pub use blackmarker::{black_marker, canonical_blackmarker_value, resolve_role};
pub use digest::{hash_value, hmac_value, HASH_ALGORITHM};
pub use enumerate::{Emitted, EnumWindow};
pub use hostname::{anonymize_hostname, HostnameScope};
pub use permute::PermutationTable;
pub use prefix::{common_prefix_len, derive_pp_key, pp_anonymize_ip, PpKey, PrefixPreserver};
pub use time::{
    adjust_secondary_timestamp, annihilate_time_units, choose_shift, shift_time, ShiftState,
    TimeUnitMask,
};
pub use truncate::{truncate_binary, truncate_string, TextCut};

/// Partition ports into privileged and ephemeral: ports below 1024 map to
/// the privileged canonical value 0, all others to the ephemeral canonical
/// value 65535.
pub fn bilateral_classify_port(port: u16) -> u16 {
    if port < 1024 {
        0
    } else {
        65535
    }
}
