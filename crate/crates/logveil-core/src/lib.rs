//! Core of a multi-level, multi-log anonymization framework: a suite of
//! anonymization primitives, a policy manager with dual-schema validation,
//! and the record-oriented module API that pluggable log parsers implement.
//!
//! Records flow as ordered lists of `(field name, canonical value)` tuples.
//! A user policy picks one algorithm per field; the policy manager checks
//! it against both the framework's algorithm catalog and the active
//! module's field schema, compiles an execution plan, and the driver loop
//! moves every record from the module through the engine and back.

pub mod engine;
pub mod error;
pub mod module;
pub mod policy;
pub mod record;

pub use error::{EngineError, ModuleError, PolicyError, PolicyErrorClass, RecordError, RunError};
pub use module::{
    run_pipeline, Locator, LogModule, ModuleCapabilities, ModuleDescriptor, ParseMode, RunReport,
};
pub use policy::{
    compile_plan, parse_policy, validate_policy, ExecutionPlan, FlaimSchema, ModuleSchema,
    UserPolicy,
};
pub use record::{FieldKind, FieldValue, Record};
