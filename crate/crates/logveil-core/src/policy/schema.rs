//! The two validation documents: the framework schema (the algorithm
//! catalog with option specifications) and the module schema (field names
//! mapped to data types and permitted algorithms).

use crate::error::PolicyError;
use crate::record::FieldKind;
use std::collections::HashMap;

/// Expected type of an option value, with range or choice constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptionType {
    Int { min: i64, max: i64 },
    Str,
    Choice(Vec<String>),
}

/// Declaration of one option an algorithm accepts.
#[derive(Debug, Clone)]
pub struct OptionSpec {
    pub name: String,
    pub ty: OptionType,
    pub required: bool,
    /// Repeatable options may appear multiple times and collect into a list.
    pub repeatable: bool,
    pub default: Option<String>,
}

impl OptionSpec {
    fn int(name: &str, min: i64, max: i64) -> OptionSpec {
        OptionSpec {
            name: name.into(),
            ty: OptionType::Int { min, max },
            required: false,
            repeatable: false,
            default: None,
        }
    }

    fn str(name: &str) -> OptionSpec {
        OptionSpec {
            name: name.into(),
            ty: OptionType::Str,
            required: false,
            repeatable: false,
            default: None,
        }
    }

    fn required(mut self) -> OptionSpec {
        self.required = true;
        self
    }

    fn repeatable(mut self) -> OptionSpec {
        self.repeatable = true;
        self
    }

    fn with_default(mut self, value: &str) -> OptionSpec {
        self.default = Some(value.into());
        self
    }
}

/// One entry of the algorithm catalog.
#[derive(Debug, Clone)]
pub struct AlgorithmSpec {
    pub id: String,
    /// Field kinds the algorithm can be applied to.
    pub kinds: Vec<FieldKind>,
    pub options: Vec<OptionSpec>,
    /// Whether the algorithm needs more than one pass over the data.
    /// None of the built-in primitives do; the flag exists so future
    /// algorithms can signal modules that random access is required.
    pub multi_pass: bool,
}

impl AlgorithmSpec {
    pub fn applies_to(&self, kind: FieldKind) -> bool {
        self.kinds.contains(&kind)
    }

    pub fn option(&self, name: &str) -> Option<&OptionSpec> {
        self.options.iter().find(|o| o.name == name)
    }
}

/// The framework-wide algorithm catalog. Ships embedded in the build;
/// every engine primitive is listed exactly once.
#[derive(Debug, Clone)]
pub struct FlaimSchema {
    algorithms: Vec<AlgorithmSpec>,
    by_id: HashMap<String, usize>,
}

/// Identifiers of the built-in algorithm catalog, in catalog order.
pub const ALGORITHM_IDS: &[&str] = &[
    "black-marker",
    "truncation",
    "random-permutation",
    "prefix-preserving",
    "hash",
    "hmac",
    "bilateral-classification",
    "time-unit-annihilation",
    "random-shift",
    "enumeration",
    "hostname-black-marker",
];

impl FlaimSchema {
    /// Build a catalog from specs, rejecting duplicate identifiers.
    pub fn new(algorithms: Vec<AlgorithmSpec>) -> Result<FlaimSchema, PolicyError> {
        let mut by_id = HashMap::new();
        for (i, spec) in algorithms.iter().enumerate() {
            if by_id.insert(spec.id.clone(), i).is_some() {
                return Err(PolicyError::Schema(format!(
                    "algorithm {:?} listed more than once",
                    spec.id
                )));
            }
        }
        Ok(FlaimSchema { algorithms, by_id })
    }

    /// The catalog of every built-in primitive.
    pub fn builtin() -> FlaimSchema {
        use FieldKind::*;
        let binary = vec![Ipv4, Mac, Port, UInt8, UInt16, UInt32];
        let hashable = vec![Ipv4, Mac, Port, UInt8, UInt16, UInt32, Text, Bytes];
        let specs = vec![
            AlgorithmSpec {
                id: "black-marker".into(),
                kinds: vec![Ipv4, Mac, Port, UInt8, UInt16, UInt32, Text, Bytes, Flag],
                options: vec![],
                multi_pass: false,
            },
            AlgorithmSpec {
                id: "truncation".into(),
                kinds: vec![Ipv4, Mac, Port, UInt8, UInt16, UInt32, Text],
                options: vec![
                    OptionSpec::int("keep_bits", 0, 48),
                    OptionSpec::int("index", 0, i64::MAX),
                    OptionSpec::str("delimiter"),
                ],
                multi_pass: false,
            },
            AlgorithmSpec {
                id: "random-permutation".into(),
                kinds: binary.clone(),
                options: vec![OptionSpec::str("fix").repeatable()],
                multi_pass: false,
            },
            AlgorithmSpec {
                id: "prefix-preserving".into(),
                kinds: vec![Ipv4],
                options: vec![
                    OptionSpec::str("passphrase"),
                    OptionSpec::str("passphrase_env"),
                ],
                multi_pass: false,
            },
            AlgorithmSpec {
                id: "hash".into(),
                kinds: hashable.clone(),
                options: vec![],
                multi_pass: false,
            },
            AlgorithmSpec {
                id: "hmac".into(),
                kinds: hashable,
                options: vec![OptionSpec::str("key"), OptionSpec::str("key_env")],
                multi_pass: false,
            },
            AlgorithmSpec {
                id: "bilateral-classification".into(),
                kinds: vec![Port],
                options: vec![],
                multi_pass: false,
            },
            AlgorithmSpec {
                id: "time-unit-annihilation".into(),
                kinds: vec![Timestamp],
                options: vec![
                    OptionSpec::str("units").required(),
                    OptionSpec::str("secondary"),
                ],
                multi_pass: false,
            },
            AlgorithmSpec {
                id: "random-shift".into(),
                kinds: vec![Timestamp],
                options: vec![
                    OptionSpec::int("lower", i64::MIN, i64::MAX).required(),
                    OptionSpec::int("upper", i64::MIN, i64::MAX).required(),
                    OptionSpec::str("secondary"),
                ],
                multi_pass: false,
            },
            AlgorithmSpec {
                id: "enumeration".into(),
                kinds: vec![Timestamp],
                options: vec![
                    OptionSpec::int("window", 1, 100_000_000).with_default("1000"),
                    OptionSpec::int("start", 0, u32::MAX as i64),
                    OptionSpec::str("secondary"),
                ],
                multi_pass: false,
            },
            AlgorithmSpec {
                id: "hostname-black-marker".into(),
                kinds: vec![Text],
                options: vec![
                    OptionSpec {
                        name: "scope".into(),
                        ty: OptionType::Choice(vec!["host-part".into(), "full".into()]),
                        required: false,
                        repeatable: false,
                        default: Some("host-part".into()),
                    },
                    OptionSpec::str("host_const").with_default("host"),
                    OptionSpec::str("net_const").with_default("network.net"),
                ],
                multi_pass: false,
            },
        ];
        FlaimSchema::new(specs).expect("builtin catalog has unique identifiers")
    }

    pub fn algorithm(&self, id: &str) -> Option<&AlgorithmSpec> {
        self.by_id.get(id).map(|&i| &self.algorithms[i])
    }

    pub fn algorithms(&self) -> impl Iterator<Item = &AlgorithmSpec> {
        self.algorithms.iter()
    }

    /// Algorithm identifiers applicable to a field kind, in catalog order.
    pub fn applicable_to(&self, kind: FieldKind) -> Vec<String> {
        self.algorithms
            .iter()
            .filter(|a| a.applies_to(kind))
            .map(|a| a.id.clone())
            .collect()
    }
}

/// One field declaration in a module schema.
#[derive(Debug, Clone)]
pub struct ModuleField {
    pub name: String,
    pub kind: FieldKind,
    /// Algorithms the module developer permits on this field. Always a
    /// subset of what the framework schema allows for the kind.
    pub algorithms: Vec<String>,
}

/// A parser module's field catalog: which fields exist, their canonical
/// kinds and which anonymization algorithms make semantic sense on them.
#[derive(Debug, Clone)]
pub struct ModuleSchema {
    fields: Vec<ModuleField>,
    by_name: HashMap<String, usize>,
}

impl ModuleSchema {
    pub fn from_fields(
        fields: Vec<ModuleField>,
        flaim: &FlaimSchema,
    ) -> Result<ModuleSchema, PolicyError> {
        let mut by_name = HashMap::new();
        for (i, field) in fields.iter().enumerate() {
            if by_name.insert(field.name.clone(), i).is_some() {
                return Err(PolicyError::Schema(format!(
                    "field {:?} declared more than once",
                    field.name
                )));
            }
            for algorithm in &field.algorithms {
                let spec = flaim.algorithm(algorithm).ok_or_else(|| {
                    PolicyError::Schema(format!(
                        "field {:?} permits unknown algorithm {algorithm:?}",
                        field.name
                    ))
                })?;
                if !spec.applies_to(field.kind) {
                    return Err(PolicyError::Schema(format!(
                        "field {:?} permits {algorithm:?}, which does not apply to {} values",
                        field.name, field.kind
                    )));
                }
            }
        }
        Ok(ModuleSchema { fields, by_name })
    }

    /// Parse a module schema document and check it against the framework
    /// schema. Grammar: a `module-schema` root holding `field` elements
    /// with `name` and `type` attributes and `algorithm` children.
    pub fn parse(document: &str, flaim: &FlaimSchema) -> Result<ModuleSchema, PolicyError> {
        let doc = roxmltree::Document::parse(document)
            .map_err(|e| PolicyError::Schema(format!("malformed document: {e}")))?;
        let root = doc.root_element();
        if root.tag_name().name() != "module-schema" {
            return Err(PolicyError::Schema(format!(
                "expected module-schema root, found {:?}",
                root.tag_name().name()
            )));
        }
        let mut fields = Vec::new();
        for node in root.children().filter(|n| n.is_element()) {
            if node.tag_name().name() != "field" {
                return Err(PolicyError::Schema(format!(
                    "unexpected element {:?}",
                    node.tag_name().name()
                )));
            }
            let name = node
                .attribute("name")
                .ok_or_else(|| PolicyError::Schema("field without name attribute".into()))?;
            let ty = node
                .attribute("type")
                .ok_or_else(|| PolicyError::Schema(format!("field {name:?} without type")))?;
            let kind = FieldKind::parse(ty)
                .ok_or_else(|| PolicyError::Schema(format!("unknown field type {ty:?}")))?;
            let mut algorithms = Vec::new();
            for child in node.children().filter(|n| n.is_element()) {
                if child.tag_name().name() != "algorithm" {
                    return Err(PolicyError::Schema(format!(
                        "unexpected element {:?} under field {name:?}",
                        child.tag_name().name()
                    )));
                }
                algorithms.push(child.text().unwrap_or("").trim().to_string());
            }
            fields.push(ModuleField {
                name: name.to_string(),
                kind,
                algorithms,
            });
        }
        ModuleSchema::from_fields(fields, flaim)
    }

    pub fn field(&self, name: &str) -> Option<&ModuleField> {
        self.by_name.get(name).map(|&i| &self.fields[i])
    }

    pub fn fields(&self) -> impl Iterator<Item = &ModuleField> {
        self.fields.iter()
    }

    pub fn permits(&self, field: &str, algorithm: &str) -> bool {
        self.field(field)
            .map(|f| f.algorithms.iter().any(|a| a == algorithm))
            .unwrap_or(false)
    }

    /// Render as a schema document in the grammar `parse` accepts.
    pub fn to_document(&self, module_name: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "<module-schema module=\"{}\">\n",
            xml_escape(module_name)
        ));
        for field in &self.fields {
            if field.algorithms.is_empty() {
                out.push_str(&format!(
                    "  <field name=\"{}\" type=\"{}\"/>\n",
                    xml_escape(&field.name),
                    field.kind.name()
                ));
            } else {
                out.push_str(&format!(
                    "  <field name=\"{}\" type=\"{}\">\n",
                    xml_escape(&field.name),
                    field.kind.name()
                ));
                for algorithm in &field.algorithms {
                    out.push_str(&format!(
                        "    <algorithm>{}</algorithm>\n",
                        xml_escape(algorithm)
                    ));
                }
                out.push_str("  </field>\n");
            }
        }
        out.push_str("</module-schema>\n");
        out
    }
}

pub(crate) fn xml_escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_catalog_lists_every_primitive_once() {
        let schema = FlaimSchema::builtin();
        let ids: Vec<&str> = schema.algorithms().map(|a| a.id.as_str()).collect();
        assert_eq!(ids, ALGORITHM_IDS);
    }

    #[test]
    fn duplicate_algorithm_rejected() {
        let a = FlaimSchema::builtin().algorithm("hash").unwrap().clone();
        let err = FlaimSchema::new(vec![a.clone(), a]).unwrap_err();
        assert!(matches!(err, PolicyError::Schema(_)));
    }

    #[test]
    fn kind_applicability() {
        let schema = FlaimSchema::builtin();
        assert!(schema
            .algorithm("prefix-preserving")
            .unwrap()
            .applies_to(FieldKind::Ipv4));
        assert!(!schema
            .algorithm("prefix-preserving")
            .unwrap()
            .applies_to(FieldKind::Timestamp));
        assert!(schema
            .algorithm("bilateral-classification")
            .unwrap()
            .applies_to(FieldKind::Port));
        assert_eq!(
            schema.applicable_to(FieldKind::Timestamp),
            vec!["time-unit-annihilation", "random-shift", "enumeration"]
        );
    }

    #[test]
    fn module_schema_round_trips_through_document_form() {
        let flaim = FlaimSchema::builtin();
        let schema = ModuleSchema::from_fields(
            vec![
                ModuleField {
                    name: "src_ip".into(),
                    kind: FieldKind::Ipv4,
                    algorithms: vec!["black-marker".into(), "truncation".into()],
                },
                ModuleField {
                    name: "note".into(),
                    kind: FieldKind::Text,
                    algorithms: vec![],
                },
            ],
            &flaim,
        )
        .unwrap();
        let doc = schema.to_document("demo");
        let reparsed = ModuleSchema::parse(&doc, &flaim).unwrap();
        assert!(reparsed.permits("src_ip", "truncation"));
        assert!(!reparsed.permits("note", "hash"));
        assert_eq!(reparsed.field("note").unwrap().kind, FieldKind::Text);
    }

    #[test]
    fn module_schema_rejects_inapplicable_permission() {
        let flaim = FlaimSchema::builtin();
        let err = ModuleSchema::from_fields(
            vec![ModuleField {
                name: "timestamp".into(),
                kind: FieldKind::Timestamp,
                algorithms: vec!["prefix-preserving".into()],
            }],
            &flaim,
        )
        .unwrap_err();
        assert!(matches!(err, PolicyError::Schema(_)));
    }

    #[test]
    fn corrupt_document_is_a_load_error() {
        let flaim = FlaimSchema::builtin();
        assert!(ModuleSchema::parse("<module-schema><field", &flaim).is_err());
        assert!(ModuleSchema::parse("<wrong-root/>", &flaim).is_err());
        assert!(ModuleSchema::parse(
            "<module-schema><field name=\"x\" type=\"nonsense\"/></module-schema>",
            &flaim
        )
        .is_err());
    }
}
