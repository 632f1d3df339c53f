//! Plan compilation: turn a validated policy into per-field bound
//! anonymizers with all run-scoped state initialized once — the shift
//! drawn, permutation tables created, keys derived and secondary-timestamp
//! links resolved to concrete field handles.

use crate::engine::{
    adjust_secondary_timestamp, annihilate_time_units, anonymize_hostname,
    bilateral_classify_port, choose_shift, derive_pp_key, hash_value, hmac_value, shift_time,
    truncate_binary, truncate_string, HostnameScope, PermutationTable, PrefixPreserver,
    ShiftState, TextCut, TimeUnitMask, HASH_ALGORITHM,
};
use crate::error::{PolicyError, RunError};
use crate::policy::{ModuleSchema, RuleBinding, ValidatedPolicy};
use crate::record::{FieldKind, FieldValue, Record};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// A field rule bound to its primitive and run state.
pub struct BoundRule {
    pub field: String,
    pub algorithm: String,
    anonymizer: FieldAnonymizer,
    secondary: Option<String>,
}

enum FieldAnonymizer {
    BlackMarker { constant: FieldValue },
    TruncateBinary { keep_bits: u32 },
    TruncateText { cut: TextCut },
    Permute(PermutationTable),
    PrefixPreserving(PrefixPreserver),
    Hash,
    Hmac { secret: Vec<u8> },
    Bilateral,
    Annihilate { mask: TimeUnitMask },
    Shift(ShiftState),
    HostnameBlackMarker { scope: HostnameScope, host_const: String, net_const: String },
}

impl FieldAnonymizer {
    fn apply(&mut self, value: &FieldValue) -> Result<FieldValue, crate::error::EngineError> {
        match self {
            FieldAnonymizer::BlackMarker { constant } => Ok(constant.clone()),
            FieldAnonymizer::TruncateBinary { keep_bits } => truncate_binary(value, *keep_bits),
            FieldAnonymizer::TruncateText { cut } => match value {
                FieldValue::Text(s) => Ok(FieldValue::Text(truncate_string(s, cut))),
                other => Ok(other.clone()),
            },
            FieldAnonymizer::Permute(table) => table.permute(value),
            FieldAnonymizer::PrefixPreserving(pp) => match value {
                FieldValue::Ipv4(ip) => Ok(FieldValue::Ipv4(pp.anonymize(*ip))),
                other => Ok(other.clone()),
            },
            FieldAnonymizer::Hash => hash_value(value, value.kind()),
            FieldAnonymizer::Hmac { secret } => hmac_value(value, secret, value.kind()),
            FieldAnonymizer::Bilateral => match value {
                FieldValue::Port(p) => Ok(FieldValue::Port(bilateral_classify_port(*p))),
                other => Ok(other.clone()),
            },
            FieldAnonymizer::Annihilate { mask } => match value {
                FieldValue::Timestamp(ts) => {
                    annihilate_time_units(*ts, *mask).map(FieldValue::Timestamp)
                }
                other => Ok(other.clone()),
            },
            FieldAnonymizer::Shift(state) => match value {
                FieldValue::Timestamp(ts) => shift_time(state, *ts).map(FieldValue::Timestamp),
                other => Ok(other.clone()),
            },
            FieldAnonymizer::HostnameBlackMarker { scope, host_const, net_const } => match value {
                FieldValue::Text(s) => Ok(FieldValue::Text(anonymize_hostname(
                    s, *scope, host_const, net_const,
                ))),
                other => Ok(other.clone()),
            },
        }
    }
}

/// The enumeration stage of a plan: which field is enumerated, the window
/// capacity, the synthetic starting time and the optional paired field.
#[derive(Debug, Clone)]
pub struct EnumBinding {
    pub field: String,
    pub capacity: usize,
    pub start: u64,
    pub secondary: Option<String>,
}

/// A compiled execution plan. Owns all mutable run state (permutation
/// tables, the drawn shift); one owner per run.
pub struct ExecutionPlan {
    rules: Vec<BoundRule>,
    enumeration: Option<EnumBinding>,
    passthrough: Vec<String>,
    multi_pass: bool,
}

impl ExecutionPlan {
    /// True if any bound primitive needs more than one pass over the data,
    /// in which case the module must offer random access.
    pub fn requires_random_access(&self) -> bool {
        self.multi_pass
    }

    pub fn enumeration(&self) -> Option<&EnumBinding> {
        self.enumeration.as_ref()
    }

    /// Module fields the plan leaves untouched.
    pub fn passthrough_fields(&self) -> &[String] {
        &self.passthrough
    }

    pub fn rules(&self) -> &[BoundRule] {
        &self.rules
    }

    /// Name of the digest backing hash and HMAC rules, for run reports.
    pub fn hash_algorithm(&self) -> &'static str {
        HASH_ALGORITHM
    }

    /// One-line summaries of the bound rules, for run reports.
    pub fn rule_summaries(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .rules
            .iter()
            .map(|r| format!("{}: {}", r.field, r.algorithm))
            .collect();
        if let Some(e) = &self.enumeration {
            out.push(format!("{}: enumeration (window {})", e.field, e.capacity));
        }
        out
    }

    /// Apply every bound per-field anonymizer to a record, adjusting
    /// declared secondary timestamps by the same delta their primary moved.
    /// Fields absent from the record are skipped; enumeration is handled by
    /// the pipeline driver, not here.
    pub fn anonymize_record(&mut self, record: &mut Record) -> Result<(), RunError> {
        for rule in &mut self.rules {
            let Some(original) = record.get(&rule.field).cloned() else {
                continue;
            };
            let replaced = rule
                .anonymizer
                .apply(&original)
                .map_err(|source| RunError::Engine {
                    field: rule.field.clone(),
                    source,
                })?;

            if let Some(secondary_field) = &rule.secondary {
                if let (
                    FieldValue::Timestamp(before),
                    FieldValue::Timestamp(after),
                    Some(FieldValue::Timestamp(sec)),
                ) = (&original, &replaced, record.get(secondary_field))
                {
                    let delta = *after as i64 - *before as i64;
                    let moved = adjust_secondary_timestamp(delta, *sec).map_err(|source| {
                        RunError::Engine {
                            field: secondary_field.clone(),
                            source,
                        }
                    })?;
                    record.set(secondary_field, FieldValue::Timestamp(moved))?;
                }
            }
            record.set(&rule.field, replaced)?;
        }
        Ok(())
    }
}

/// Compile a validated policy into an execution plan. Run-scoped state is
/// initialized here exactly once: the shift is drawn, permutation tables
/// and their fixed entries are created, keys are derived from passphrases,
/// and the enumeration start is fixed. All randomness flows from `rng`, so
/// plans are deterministic given (policy, seed).
pub fn compile_plan(
    policy: &ValidatedPolicy,
    module: &ModuleSchema,
    rng: &mut ChaCha20Rng,
) -> Result<ExecutionPlan, PolicyError> {
    let plan_err = |reason: String| PolicyError::Plan { reason };

    let mut rules = Vec::new();
    let mut enumeration = None;
    let mut multi_pass = false;
    let mut claimed_secondaries: Vec<String> = Vec::new();

    let ruled: Vec<&str> = policy.rules.iter().map(|r| r.field.as_str()).collect();

    for rule in &policy.rules {
        // Resolve a declared secondary-timestamp handle against the module
        // schema. These are the cross-field references plan compilation can
        // still fail on after a successful validation.
        if let Some(secondary) = rule.binding.secondary() {
            let sec_field = module.field(secondary).ok_or_else(|| {
                plan_err(format!(
                    "rule for {:?} names secondary field {secondary:?}, which the module does not declare",
                    rule.field
                ))
            })?;
            if sec_field.kind != FieldKind::Timestamp {
                return Err(plan_err(format!(
                    "secondary field {secondary:?} is a {} field, not a timestamp",
                    sec_field.kind
                )));
            }
            if secondary == rule.field {
                return Err(plan_err(format!(
                    "rule for {:?} names itself as its secondary field",
                    rule.field
                )));
            }
            if ruled.contains(&secondary) {
                return Err(plan_err(format!(
                    "secondary field {secondary:?} also carries its own rule"
                )));
            }
            if claimed_secondaries.iter().any(|s| s == secondary) {
                return Err(plan_err(format!(
                    "secondary field {secondary:?} is claimed by more than one rule"
                )));
            }
            claimed_secondaries.push(secondary.to_string());
        }

        multi_pass |= rule.multi_pass;

        let anonymizer = match &rule.binding {
            RuleBinding::BlackMarker { constant } => FieldAnonymizer::BlackMarker {
                constant: constant.clone(),
            },
            RuleBinding::TruncateBinary { keep_bits } => FieldAnonymizer::TruncateBinary {
                keep_bits: *keep_bits,
            },
            RuleBinding::TruncateText { cut } => {
                FieldAnonymizer::TruncateText { cut: cut.clone() }
            }
            RuleBinding::RandomPermutation { fixed } => {
                let table_rng = ChaCha20Rng::seed_from_u64(rng.gen());
                let mut table = PermutationTable::new(rule.kind, table_rng)
                    .map_err(|e| plan_err(e.to_string()))?;
                let pairs: Vec<(FieldValue, FieldValue)> =
                    fixed.iter().map(|v| (v.clone(), v.clone())).collect();
                table
                    .prefill_fixed(&pairs)
                    .map_err(|e| plan_err(e.to_string()))?;
                FieldAnonymizer::Permute(table)
            }
            RuleBinding::PrefixPreserving { passphrase } => {
                let key = derive_pp_key(passphrase).map_err(|e| plan_err(e.to_string()))?;
                FieldAnonymizer::PrefixPreserving(PrefixPreserver::new(&key))
            }
            RuleBinding::Hash => FieldAnonymizer::Hash,
            RuleBinding::Hmac { secret } => FieldAnonymizer::Hmac {
                secret: secret.clone(),
            },
            RuleBinding::Bilateral => FieldAnonymizer::Bilateral,
            RuleBinding::Annihilate { mask, .. } => FieldAnonymizer::Annihilate { mask: *mask },
            RuleBinding::RandomShift { lower, upper, .. } => {
                let state =
                    choose_shift(*lower, *upper, rng).map_err(|e| plan_err(e.to_string()))?;
                FieldAnonymizer::Shift(state)
            }
            RuleBinding::Enumeration {
                window,
                start,
                secondary,
            } => {
                let start = match start {
                    Some(fixed) => *fixed,
                    // Random starting time for the first record.
                    None => rng.gen_range(0..(1u64 << 30)),
                };
                enumeration = Some(EnumBinding {
                    field: rule.field.clone(),
                    capacity: *window,
                    start,
                    secondary: secondary.clone(),
                });
                continue;
            }
            RuleBinding::HostnameBlackMarker {
                scope,
                host_const,
                net_const,
            } => FieldAnonymizer::HostnameBlackMarker {
                scope: *scope,
                host_const: host_const.clone(),
                net_const: net_const.clone(),
            },
        };

        rules.push(BoundRule {
            field: rule.field.clone(),
            algorithm: rule.algorithm.clone(),
            anonymizer,
            secondary: rule.binding.secondary().map(str::to_string),
        });
    }

    let passthrough = module
        .fields()
        .filter(|f| {
            !ruled.contains(&f.name.as_str())
                && !claimed_secondaries.iter().any(|s| s == &f.name)
        })
        .map(|f| f.name.clone())
        .collect();

    Ok(ExecutionPlan {
        rules,
        enumeration,
        passthrough,
        multi_pass,
    })
}
