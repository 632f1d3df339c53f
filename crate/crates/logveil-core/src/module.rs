//! The contract every parser module implements and the driver loop that
//! moves records between a module and the anonymization engine.
//!
//! A module owns parsing and serialization of one log format; the core
//! never touches the medium. Static files allow random access (the record
//! counter can be reset); streams can be read once only, so a plan that
//! needs more than one pass is refused up front.

use crate::error::{ModuleError, RunError};
use crate::policy::ExecutionPlan;
use crate::record::{FieldValue, Record};
use crate::engine::EnumWindow;
use std::path::PathBuf;
use std::time::{Duration, Instant};

/// Where a module reads from or writes to: a file path, or standard
/// input/output written `-` on the command line. Stdio locators force
/// stream mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Locator {
    Path(PathBuf),
    Stdio,
}

impl Locator {
    pub fn parse(text: &str) -> Locator {
        if text == "-" {
            Locator::Stdio
        } else {
            Locator::Path(PathBuf::from(text))
        }
    }

    pub fn is_stdio(&self) -> bool {
        matches!(self, Locator::Stdio)
    }

    pub fn display(&self) -> String {
        match self {
            Locator::Path(p) => p.display().to_string(),
            Locator::Stdio => "-".to_string(),
        }
    }
}

/// How a module treats unparsable input. Strict aborts the run; lenient
/// wraps the raw line in a remainder-only record that passes through
/// unanonymized with a warning. Strict is the default: silent pass-through
/// can leak exactly the data a policy was meant to hide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

/// What a module can do with its current data sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModuleCapabilities {
    pub supports_streams: bool,
    pub supports_random_access: bool,
}

/// Identity and capabilities of a loaded module.
#[derive(Debug, Clone)]
pub struct ModuleDescriptor {
    pub name: String,
    pub capabilities: ModuleCapabilities,
}

/// The module interface. Mirrors the record-oriented function set modules
/// must provide: expose the schema, bind data sets, read and write single
/// records, and manage the record counter.
pub trait LogModule {
    fn descriptor(&self) -> &ModuleDescriptor;

    /// The module schema document, validated by the policy manager before
    /// any record flows.
    fn schema_document(&self) -> String;

    /// Bind input and output. Fails on unreadable input, unwritable output
    /// or an input that aliases the output.
    fn set_data_sets(&mut self, input: &Locator, output: &Locator) -> Result<(), ModuleError>;

    /// Return the next record and advance the counter. Calling past the end
    /// of input is a contract violation.
    fn get_record(&mut self) -> Result<Record, ModuleError>;

    /// Serialize one record to the output in module-native format.
    fn put_record(&mut self, record: &Record) -> Result<(), ModuleError>;

    /// Zero-based index of the next record to be read.
    fn counter_value(&self) -> u64;

    /// Rewind to record zero. Returns false when the data set does not
    /// support random access (streams).
    fn reset_counter(&mut self) -> bool;

    /// True when no records remain.
    fn at_end(&mut self) -> bool;
}

/// Outcome of one pipeline run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub records_in: u64,
    pub records_out: u64,
    pub warnings: Vec<String>,
    pub rule_summary: Vec<String>,
    pub passthrough_fields: Vec<String>,
    pub hash_algorithm: &'static str,
    pub elapsed: Duration,
}

/// Drive the record loop: request a record, anonymize it per the plan, send
/// it back to be written, and repeat until end of input; enumeration
/// windows are flushed at the end so no record is dropped.
pub fn run_pipeline(
    module: &mut dyn LogModule,
    plan: &mut ExecutionPlan,
) -> Result<RunReport, RunError> {
    let started = Instant::now();
    if plan.requires_random_access()
        && !module.descriptor().capabilities.supports_random_access
    {
        return Err(RunError::CapabilityMismatch {
            module: module.descriptor().name.clone(),
        });
    }

    let mut report = RunReport {
        records_in: 0,
        records_out: 0,
        warnings: Vec::new(),
        rule_summary: plan.rule_summaries(),
        passthrough_fields: plan.passthrough_fields().to_vec(),
        hash_algorithm: plan.hash_algorithm(),
        elapsed: Duration::ZERO,
    };

    let mut window: Option<EnumWindow<Record>> = match plan.enumeration() {
        Some(binding) => Some(
            EnumWindow::new(binding.capacity, binding.start).map_err(|source| {
                RunError::Engine {
                    field: binding.field.clone(),
                    source,
                }
            })?,
        ),
        None => None,
    };

    while !module.at_end() {
        let mut record = module.get_record()?;
        report.records_in += 1;

        if record.is_raw_only() {
            report.warnings.push(format!(
                "record {} passed through unparsed and unanonymized",
                report.records_in
            ));
            put_counted(module, &record, &mut report)?;
            continue;
        }

        plan.anonymize_record(&mut record)?;

        let Some(win) = window.as_mut() else {
            put_counted(module, &record, &mut report)?;
            continue;
        };
        let binding = plan.enumeration().expect("window implies binding");
        let Some(FieldValue::Timestamp(ts)) = record.get(&binding.field).cloned() else {
            report.warnings.push(format!(
                "record {} lacks enumerated field {:?}, written without reordering",
                report.records_in, binding.field
            ));
            put_counted(module, &record, &mut report)?;
            continue;
        };
        for emitted in win.push(ts, record) {
            let finished = finish_enumerated(
                emitted.payload,
                emitted.original,
                emitted.synthetic,
                binding,
            )?;
            put_counted(module, &finished, &mut report)?;
        }
    }

    if let (Some(mut win), Some(binding)) = (window, plan.enumeration()) {
        for emitted in win.flush() {
            let finished = finish_enumerated(
                emitted.payload,
                emitted.original,
                emitted.synthetic,
                binding,
            )?;
            put_counted(module, &finished, &mut report)?;
        }
    }

    report.elapsed = started.elapsed();
    Ok(report)
}

fn finish_enumerated(
    mut record: Record,
    original: u64,
    synthetic: u64,
    binding: &crate::policy::EnumBinding,
) -> Result<Record, RunError> {
    record.set(&binding.field, FieldValue::Timestamp(synthetic))?;
    if let Some(secondary) = &binding.secondary {
        if let Some(FieldValue::Timestamp(sec)) = record.get(secondary).cloned() {
            let delta = synthetic as i64 - original as i64;
            let moved = crate::engine::adjust_secondary_timestamp(delta, sec).map_err(
                |source| RunError::Engine {
                    field: secondary.clone(),
                    source,
                },
            )?;
            record.set(secondary, FieldValue::Timestamp(moved))?;
        }
    }
    Ok(record)
}

fn put_counted(
    module: &mut dyn LogModule,
    record: &Record,
    report: &mut RunReport,
) -> Result<(), RunError> {
    module
        .put_record(record)
        .map_err(|source| RunError::PartialOutput {
            written: report.records_out,
            source,
        })?;
    report.records_out += 1;
    Ok(())
}
