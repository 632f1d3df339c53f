//! The policy manager: parses user anonymization policies, validates them
//! against both the framework schema and the active module's schema, and
//! compiles per-field execution plans.
//!
//! A policy passes validation only when every rule names a cataloged
//! algorithm, its options type-check against the algorithm's option
//! specification, the field exists in the module schema and the module
//! permits the pairing. A prefix-preserving rule on a timestamp field, for
//! instance, is rejected before any data is read.

mod plan;
mod schema;

pub use plan::{compile_plan, BoundRule, EnumBinding, ExecutionPlan};
pub use schema::{
    AlgorithmSpec, FlaimSchema, ModuleField, ModuleSchema, OptionSpec, OptionType, ALGORITHM_IDS,
};

use crate::engine::{
    canonical_blackmarker_value, HostnameScope, TextCut, TimeUnitMask,
};
use crate::error::PolicyError;
use crate::record::{FieldKind, FieldValue};
use std::collections::{HashMap, HashSet};

/// One anonymization rule: a field handle, an algorithm identifier and raw
/// option pairs as they appeared in the document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldRule {
    pub field: String,
    pub algorithm: String,
    pub options: Vec<(String, String)>,
}

/// A parsed user policy. At most one rule per field name; fields without
/// rules pass through unchanged.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserPolicy {
    pub rules: Vec<FieldRule>,
    pub seed: Option<u64>,
}

/// Parse a policy document.
///
/// Grammar: a `policy` root (optional `seed` attribute) holding `field`
/// elements with `name` and `algorithm` attributes and `option` children
/// carrying `name`/`value` attributes.
pub fn parse_policy(document: &str) -> Result<UserPolicy, PolicyError> {
    let doc = roxmltree::Document::parse(document).map_err(|e| PolicyError::Parse {
        message: e.to_string(),
        line: e.pos().row,
        col: e.pos().col,
    })?;
    let pos_of = |node: &roxmltree::Node| {
        let pos = doc.text_pos_at(node.range().start);
        (pos.row, pos.col)
    };
    let parse_err = |node: &roxmltree::Node, message: String| {
        let (line, col) = pos_of(node);
        PolicyError::Parse { message, line, col }
    };

    let root = doc.root_element();
    if root.tag_name().name() != "policy" {
        return Err(parse_err(
            &root,
            format!("expected policy root, found {:?}", root.tag_name().name()),
        ));
    }
    let seed = match root.attribute("seed") {
        Some(text) => Some(text.parse::<u64>().map_err(|_| {
            parse_err(&root, format!("seed attribute {text:?} is not an integer"))
        })?),
        None => None,
    };

    let mut rules = Vec::new();
    let mut seen = HashSet::new();
    for node in root.children().filter(|n| n.is_element()) {
        if node.tag_name().name() != "field" {
            return Err(parse_err(
                &node,
                format!("unexpected element {:?}", node.tag_name().name()),
            ));
        }
        let field = node
            .attribute("name")
            .ok_or_else(|| parse_err(&node, "field element without name attribute".into()))?
            .to_string();
        let algorithm = node
            .attribute("algorithm")
            .ok_or_else(|| {
                parse_err(&node, format!("field {field:?} without algorithm attribute"))
            })?
            .to_string();
        if !seen.insert(field.clone()) {
            return Err(PolicyError::DuplicateRule { field });
        }
        let mut options = Vec::new();
        for child in node.children().filter(|n| n.is_element()) {
            if child.tag_name().name() != "option" {
                return Err(parse_err(
                    &child,
                    format!(
                        "unexpected element {:?} under field {field:?}",
                        child.tag_name().name()
                    ),
                ));
            }
            let name = child
                .attribute("name")
                .ok_or_else(|| parse_err(&child, "option without name attribute".into()))?;
            let value = child
                .attribute("value")
                .ok_or_else(|| parse_err(&child, format!("option {name:?} without value")))?;
            options.push((name.to_string(), value.to_string()));
        }
        rules.push(FieldRule {
            field,
            algorithm,
            options,
        });
    }
    Ok(UserPolicy { rules, seed })
}

/// A rule after validation: the field's kind is resolved, options are
/// typed, defaulted and semantically checked, and key material is bound.
#[derive(Debug, Clone)]
pub struct ValidatedRule {
    pub field: String,
    pub kind: FieldKind,
    pub algorithm: String,
    pub binding: RuleBinding,
    pub multi_pass: bool,
}

/// The fully resolved per-algorithm parameters, ready for plan compilation.
#[derive(Debug, Clone)]
pub enum RuleBinding {
    BlackMarker {
        constant: FieldValue,
    },
    TruncateBinary {
        keep_bits: u32,
    },
    TruncateText {
        cut: TextCut,
    },
    RandomPermutation {
        fixed: Vec<FieldValue>,
    },
    PrefixPreserving {
        passphrase: String,
    },
    Hash,
    Hmac {
        secret: Vec<u8>,
    },
    Bilateral,
    Annihilate {
        mask: TimeUnitMask,
        secondary: Option<String>,
    },
    RandomShift {
        lower: i64,
        upper: i64,
        secondary: Option<String>,
    },
    Enumeration {
        window: usize,
        start: Option<u64>,
        secondary: Option<String>,
    },
    HostnameBlackMarker {
        scope: HostnameScope,
        host_const: String,
        net_const: String,
    },
}

impl RuleBinding {
    pub fn secondary(&self) -> Option<&str> {
        match self {
            RuleBinding::Annihilate { secondary, .. }
            | RuleBinding::RandomShift { secondary, .. }
            | RuleBinding::Enumeration { secondary, .. } => secondary.as_deref(),
            _ => None,
        }
    }
}

/// The validated inputs to plan compilation.
#[derive(Debug, Clone)]
pub struct ValidatedPolicy {
    pub rules: Vec<ValidatedRule>,
    pub seed: Option<u64>,
}

/// Typed option values after defaulting.
struct ResolvedOptions {
    ints: HashMap<String, i64>,
    strs: HashMap<String, String>,
    lists: HashMap<String, Vec<String>>,
}

impl ResolvedOptions {
    fn int(&self, name: &str) -> Option<i64> {
        self.ints.get(name).copied()
    }
    fn str(&self, name: &str) -> Option<&str> {
        self.strs.get(name).map(|s| s.as_str())
    }
    fn list(&self, name: &str) -> &[String] {
        self.lists.get(name).map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Validate a policy against the framework schema and the module schema.
///
/// Every rule must (1) name a cataloged algorithm, (2) carry options that
/// type-check against that algorithm's option specification, and (3) pair
/// with a module field whose kind the algorithm applies to and whose module
/// permission list includes it. Each failure carries a distinct diagnostic
/// class.
pub fn validate_policy(
    policy: &UserPolicy,
    flaim: &FlaimSchema,
    module: &ModuleSchema,
) -> Result<ValidatedPolicy, PolicyError> {
    let mut rules = Vec::with_capacity(policy.rules.len());
    let mut seen = HashSet::new();
    let mut enumeration_fields: Vec<String> = Vec::new();

    for rule in &policy.rules {
        if !seen.insert(rule.field.clone()) {
            return Err(PolicyError::DuplicateRule {
                field: rule.field.clone(),
            });
        }
        let spec = flaim
            .algorithm(&rule.algorithm)
            .ok_or_else(|| PolicyError::UnknownAlgorithm {
                algorithm: rule.algorithm.clone(),
            })?;
        let field = module
            .field(&rule.field)
            .ok_or_else(|| PolicyError::UnknownField {
                field: rule.field.clone(),
            })?;

        if !spec.applies_to(field.kind) {
            return Err(PolicyError::Disallowed {
                field: rule.field.clone(),
                algorithm: rule.algorithm.clone(),
                reason: format!("algorithm does not apply to {} values", field.kind),
            });
        }
        if !module.permits(&rule.field, &rule.algorithm) {
            return Err(PolicyError::Disallowed {
                field: rule.field.clone(),
                algorithm: rule.algorithm.clone(),
                reason: "the module schema does not permit this pairing".into(),
            });
        }

        let options = resolve_options(rule, spec)?;
        let binding = bind_rule(rule, spec, field.kind, &options)?;
        if matches!(binding, RuleBinding::Enumeration { .. }) {
            enumeration_fields.push(rule.field.clone());
        }
        rules.push(ValidatedRule {
            field: rule.field.clone(),
            kind: field.kind,
            algorithm: rule.algorithm.clone(),
            binding,
            multi_pass: spec.multi_pass,
        });
    }

    if enumeration_fields.len() > 1 {
        return Err(PolicyError::ConflictingRules {
            reason: format!(
                "enumeration may reorder records for at most one field per run, got rules for {}",
                enumeration_fields.join(", ")
            ),
        });
    }

    Ok(ValidatedPolicy {
        rules,
        seed: policy.seed,
    })
}

fn resolve_options(rule: &FieldRule, spec: &AlgorithmSpec) -> Result<ResolvedOptions, PolicyError> {
    let option_err = |reason: String| PolicyError::Option {
        field: rule.field.clone(),
        algorithm: rule.algorithm.clone(),
        reason,
    };

    let mut raw: HashMap<&str, Vec<&str>> = HashMap::new();
    for (name, value) in &rule.options {
        let declared = spec
            .option(name)
            .ok_or_else(|| option_err(format!("unknown option {name:?}")))?;
        let bucket = raw.entry(name.as_str()).or_default();
        if !declared.repeatable && !bucket.is_empty() {
            return Err(option_err(format!("option {name:?} given more than once")));
        }
        bucket.push(value.as_str());
    }

    let mut resolved = ResolvedOptions {
        ints: HashMap::new(),
        strs: HashMap::new(),
        lists: HashMap::new(),
    };
    for declared in &spec.options {
        let given = raw.get(declared.name.as_str());
        let values: Vec<&str> = match (given, &declared.default) {
            (Some(v), _) => v.clone(),
            (None, Some(default)) => vec![default.as_str()],
            (None, None) => {
                if declared.required {
                    return Err(option_err(format!("missing required option {:?}", declared.name)));
                }
                continue;
            }
        };
        if declared.repeatable {
            resolved.lists.insert(
                declared.name.clone(),
                values.iter().map(|s| s.to_string()).collect(),
            );
            continue;
        }
        let value = values[0];
        match &declared.ty {
            OptionType::Int { min, max } => {
                let parsed: i64 = value.parse().map_err(|_| {
                    option_err(format!("option {:?} value {value:?} is not an integer", declared.name))
                })?;
                if parsed < *min || parsed > *max {
                    return Err(option_err(format!(
                        "option {:?} value {parsed} outside {min}..={max}",
                        declared.name
                    )));
                }
                resolved.ints.insert(declared.name.clone(), parsed);
            }
            OptionType::Str => {
                resolved.strs.insert(declared.name.clone(), value.to_string());
            }
            OptionType::Choice(choices) => {
                if !choices.iter().any(|c| c == value) {
                    return Err(option_err(format!(
                        "option {:?} value {value:?} not one of {choices:?}",
                        declared.name
                    )));
                }
                resolved.strs.insert(declared.name.clone(), value.to_string());
            }
        }
    }
    Ok(resolved)
}

/// Secrets may name an environment variable so policy files can be shared
/// without embedding key material; a set environment variable overrides an
/// inline option value.
fn resolve_secret(
    inline: Option<&str>,
    env_name: Option<&str>,
) -> Result<Option<String>, String> {
    if let Some(var) = env_name {
        match std::env::var(var) {
            Ok(value) if !value.is_empty() => return Ok(Some(value)),
            Ok(_) => return Err(format!("environment variable {var:?} is empty")),
            Err(_) => {
                if inline.is_none() {
                    return Err(format!("environment variable {var:?} is not set"));
                }
            }
        }
    }
    Ok(inline.map(|s| s.to_string()))
}

fn bind_rule(
    rule: &FieldRule,
    spec: &AlgorithmSpec,
    kind: FieldKind,
    options: &ResolvedOptions,
) -> Result<RuleBinding, PolicyError> {
    let option_err = |reason: String| PolicyError::Option {
        field: rule.field.clone(),
        algorithm: rule.algorithm.clone(),
        reason,
    };

    Ok(match spec.id.as_str() {
        "black-marker" => {
            let constant =
                canonical_blackmarker_value(kind, &rule.field).map_err(|e| {
                    PolicyError::Disallowed {
                        field: rule.field.clone(),
                        algorithm: rule.algorithm.clone(),
                        reason: e.to_string(),
                    }
                })?;
            RuleBinding::BlackMarker { constant }
        }
        "truncation" => {
            if kind == FieldKind::Text {
                if options.int("keep_bits").is_some() {
                    return Err(option_err("keep_bits does not apply to text fields".into()));
                }
                match (options.int("index"), options.str("delimiter")) {
                    (Some(_), Some(_)) => {
                        return Err(option_err("give either index or delimiter, not both".into()))
                    }
                    (Some(i), None) => RuleBinding::TruncateText {
                        cut: TextCut::Index(i as usize),
                    },
                    (None, Some(d)) => {
                        let mut chars = d.chars();
                        let (first, rest) = (chars.next(), chars.next());
                        match (first, rest) {
                            (Some(c), None) => RuleBinding::TruncateText {
                                cut: TextCut::BeforeDelimiter(c),
                            },
                            _ => {
                                return Err(option_err(format!(
                                    "delimiter {d:?} must be a single character"
                                )))
                            }
                        }
                    }
                    (None, None) => {
                        return Err(option_err(
                            "text truncation needs an index or a delimiter".into(),
                        ))
                    }
                }
            } else {
                if options.int("index").is_some() || options.str("delimiter").is_some() {
                    return Err(option_err(
                        "index and delimiter apply only to text fields".into(),
                    ));
                }
                let keep_bits = options
                    .int("keep_bits")
                    .ok_or_else(|| option_err("missing required option keep_bits".into()))?;
                let width = kind.bit_width().unwrap_or(0);
                if keep_bits < 0 || keep_bits as u32 > width {
                    return Err(option_err(format!(
                        "keep_bits {keep_bits} outside 0..={width} for a {kind} field"
                    )));
                }
                RuleBinding::TruncateBinary {
                    keep_bits: keep_bits as u32,
                }
            }
        }
        "random-permutation" => {
            let mut fixed = Vec::new();
            for raw in options.list("fix") {
                let value = FieldValue::parse_as(kind, raw)
                    .map_err(|e| option_err(format!("fix value {raw:?}: {e}")))?;
                fixed.push(value);
            }
            RuleBinding::RandomPermutation { fixed }
        }
        "prefix-preserving" => {
            let passphrase =
                resolve_secret(options.str("passphrase"), options.str("passphrase_env"))
                    .map_err(|e| option_err(e))?
                    .filter(|p| !p.is_empty())
                    .ok_or_else(|| {
                        option_err("a passphrase or passphrase_env option is required".into())
                    })?;
            RuleBinding::PrefixPreserving { passphrase }
        }
        "hash" => RuleBinding::Hash,
        "hmac" => {
            let secret = resolve_secret(options.str("key"), options.str("key_env"))
                .map_err(|e| option_err(e))?
                .filter(|k| !k.is_empty())
                .ok_or_else(|| option_err("a key or key_env option is required".into()))?;
            RuleBinding::Hmac {
                secret: secret.into_bytes(),
            }
        }
        "bilateral-classification" => RuleBinding::Bilateral,
        "time-unit-annihilation" => {
            let mask = TimeUnitMask::parse(options.str("units").unwrap_or(""))
                .map_err(|e| option_err(e))?;
            RuleBinding::Annihilate {
                mask,
                secondary: options.str("secondary").map(str::to_string),
            }
        }
        "random-shift" => {
            let lower = options.int("lower").unwrap();
            let upper = options.int("upper").unwrap();
            if lower > upper {
                return Err(option_err(format!(
                    "lower bound {lower} exceeds upper bound {upper}"
                )));
            }
            RuleBinding::RandomShift {
                lower,
                upper,
                secondary: options.str("secondary").map(str::to_string),
            }
        }
        "enumeration" => RuleBinding::Enumeration {
            window: options.int("window").unwrap() as usize,
            start: options.int("start").map(|s| s as u64),
            secondary: options.str("secondary").map(str::to_string),
        },
        "hostname-black-marker" => RuleBinding::HostnameBlackMarker {
            scope: match options.str("scope").unwrap() {
                "full" => HostnameScope::Full,
                _ => HostnameScope::HostPart,
            },
            host_const: options.str("host_const").unwrap().to_string(),
            net_const: options.str("net_const").unwrap().to_string(),
        },
        other => {
            // A catalog extended beyond the built-in primitives cannot be
            // bound by this build.
            return Err(PolicyError::UnknownAlgorithm {
                algorithm: other.to_string(),
            });
        }
    })
}
