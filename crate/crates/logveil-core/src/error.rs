//! Error types shared across the engine, policy manager and module driver.

use crate::record::FieldKind;
use thiserror::Error;

/// Failures raised by anonymization primitives.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("no canonical black-marker constant for {kind} field in role {role:?}")]
    UnknownBlackMarkerRole { kind: FieldKind, role: String },

    #[error("keep_bits {keep_bits} out of range for {kind} (width {width} bits)")]
    KeepBitsOutOfRange {
        kind: FieldKind,
        keep_bits: u32,
        width: u32,
    },

    #[error("{kind} values are not bit-truncatable")]
    NotTruncatable { kind: FieldKind },

    #[error("passphrase must not be empty")]
    EmptyPassphrase,

    #[error("keyed-hash secret must not be empty")]
    EmptySecret,

    #[error("{kind} values cannot be randomly permuted")]
    NotPermutable { kind: FieldKind },

    #[error("expected {expected} value, got {actual}")]
    KindMismatch {
        expected: FieldKind,
        actual: FieldKind,
    },

    #[error("value space for {kind} exhausted, no free anonymized value left")]
    ValueSpaceExhausted { kind: FieldKind },

    #[error("permutation prefill conflict: {reason}")]
    PrefillConflict { reason: String },

    #[error("shift bounds inverted: lower {lower} > upper {upper}")]
    ShiftBoundsInverted { lower: i64, upper: i64 },

    #[error("timestamp {ts} with shift {delta} leaves the representable epoch range")]
    TimestampOverflow { ts: u64, delta: i64 },

    #[error("timestamp {ts} is not convertible to a calendar date")]
    TimestampOutOfCalendarRange { ts: u64 },

    #[error("time-unit mask selects no units")]
    EmptyTimeUnitMask,

    #[error("enumeration window capacity must be at least 1")]
    ZeroWindowCapacity,
}

/// Failures raised while building or mutating records.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecordError {
    #[error("duplicate field name {0:?} in record")]
    DuplicateField(String),

    #[error("record has no field named {0:?}")]
    NoSuchField(String),

    #[error("field {name:?} holds {actual}, cannot overwrite with {replacement}")]
    KindChanged {
        name: String,
        actual: FieldKind,
        replacement: FieldKind,
    },

    #[error("cannot parse {text:?} as {kind}: {reason}")]
    Coercion {
        kind: FieldKind,
        text: String,
        reason: String,
    },
}

/// Diagnostic classes for policy handling, from parsing through plan
/// compilation. Each validation failure maps to exactly one variant so
/// callers can classify rejections.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("policy document error at line {line}, column {col}: {message}")]
    Parse {
        message: String,
        line: u32,
        col: u32,
    },

    #[error("more than one rule for field {field:?}")]
    DuplicateRule { field: String },

    #[error("unknown anonymization algorithm {algorithm:?}")]
    UnknownAlgorithm { algorithm: String },

    #[error("field {field:?} is not declared by the active module")]
    UnknownField { field: String },

    #[error("invalid option for {algorithm:?} on field {field:?}: {reason}")]
    Option {
        field: String,
        algorithm: String,
        reason: String,
    },

    #[error("algorithm {algorithm:?} is not allowed on field {field:?}: {reason}")]
    Disallowed {
        field: String,
        algorithm: String,
        reason: String,
    },

    #[error("conflicting rules: {reason}")]
    ConflictingRules { reason: String },

    #[error("plan error: {reason}")]
    Plan { reason: String },

    #[error("module schema error: {0}")]
    Schema(String),
}

impl PolicyError {
    /// Coarse diagnostic class, stable across message wording changes.
    pub fn class(&self) -> PolicyErrorClass {
        match self {
            PolicyError::Parse { .. } => PolicyErrorClass::Parse,
            PolicyError::DuplicateRule { .. } => PolicyErrorClass::DuplicateRule,
            PolicyError::UnknownAlgorithm { .. } => PolicyErrorClass::UnknownAlgorithm,
            PolicyError::UnknownField { .. } => PolicyErrorClass::UnknownField,
            PolicyError::Option { .. } => PolicyErrorClass::Option,
            PolicyError::Disallowed { .. } => PolicyErrorClass::Disallowed,
            PolicyError::ConflictingRules { .. } => PolicyErrorClass::ConflictingRules,
            PolicyError::Plan { .. } => PolicyErrorClass::Plan,
            PolicyError::Schema(_) => PolicyErrorClass::Schema,
        }
    }
}

/// The classification used by diagnostics and tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyErrorClass {
    Parse,
    DuplicateRule,
    UnknownAlgorithm,
    UnknownField,
    Option,
    Disallowed,
    ConflictingRules,
    Plan,
    Schema,
}

/// Failures raised by parser modules and their I/O.
#[derive(Debug, Error)]
pub enum ModuleError {
    #[error("unknown module {0:?}")]
    UnknownModule(String),

    #[error("module schema could not be loaded: {0}")]
    SchemaLoad(String),

    #[error("input {0:?} is not readable: {1}")]
    InputUnreadable(String, String),

    #[error("output {0:?} is not writable: {1}")]
    OutputUnwritable(String, String),

    #[error("input and output refer to the same location {0:?}")]
    SameLocator(String),

    #[error("module has no data sets bound; call set_data_sets first")]
    NotBound,

    #[error("get_record called after end of input")]
    PastEnd,

    #[error("line {line_no}: cannot parse record: {reason}")]
    ParseFailure {
        line_no: u64,
        reason: String,
        raw: String,
    },

    #[error("record field {0:?} is not part of the module schema")]
    UnknownRecordField(String),

    #[error("record cannot be serialized: {0}")]
    Serialize(String),

    #[error("module configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Failures raised by the record pipeline driver.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("plan requires random access but module {module:?} reads a stream")]
    CapabilityMismatch { module: String },

    #[error(transparent)]
    Module(#[from] ModuleError),

    #[error("field {field:?}: {source}")]
    Engine {
        field: String,
        source: EngineError,
    },

    #[error("record error: {0}")]
    Record(#[from] RecordError),

    #[error("write failed after {written} records, output is partial: {source}")]
    PartialOutput {
        written: u64,
        source: ModuleError,
    },
}
